//! Fixture writers for the test suites.
//!
//! Nothing in here is production code: the emitters are deliberately minimal
//! (well-formed output only, no streaming, no recovery) so they can serve as
//! an independent oracle for the real readers.

mod arc;
mod corrupt;
mod site;
mod warc;

pub use arc::ArcWriter;
pub use corrupt::{corrupt_range, garbage_bytes, truncate_bytes};
pub use site::{
    write_large_collection, LargeCollectionSummary, SiteManifest, SitePage, SiteSpec,
    SyntheticSite,
};
pub use warc::{HttpResponseSpec, WarcWriter};

/// Lowercase MD5 hex, used when fixtures must predict payload checksums.
pub fn md5_hex(bytes: &[u8]) -> String {
    use md5::{Digest, Md5};
    hex::encode(Md5::digest(bytes))
}
