pub mod corpus;
pub mod gen;
pub mod oracle;
pub mod strategies;
