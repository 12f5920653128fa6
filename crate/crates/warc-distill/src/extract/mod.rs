//! The UDF library: pure functions over URLs, HTML, and payload bytes used
//! by filtering and extraction stages. Everything here is reentrant and safe
//! to call from any number of workers.

mod checksum;
mod domain;
mod html;
mod keywords;
mod links;
mod mime;
mod text;

pub use checksum::checksum_payload;
pub use domain::extract_domain;
pub use keywords::keyword_counts;
pub use links::{extract_links, Hyperlink};
pub use mime::{detect_mime, is_valid_page, MimeClass, MimeOrigin};
pub use text::{extract_text, extract_text_with_charset};

pub(crate) use mime::detect_mime_ct;

#[derive(Debug, thiserror::Error)]
pub enum ExtractError {
    #[error("keyword list must not be empty")]
    EmptyKeywordList,
    #[error("keywords must not be empty strings")]
    EmptyKeyword,
}
