//! The tutor service: sessions, assignments and grading, served over
//! HTTP/JSON.

mod http;
pub mod store;
pub mod tutor;

pub use http::{router, serve};
pub use tutor::{discover, Database, ServiceError, Tutor, TutorConfig};
