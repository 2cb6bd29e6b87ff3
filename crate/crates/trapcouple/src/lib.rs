pub mod db;
pub mod error;
pub mod report;
pub mod scenarios;
pub mod acceptance;
