use md5::{Digest, Md5};

/// Lowercase MD5 hex of the payload bytes, for image deduplication and the
/// checksum recipes.
pub fn checksum_payload(bytes: &[u8]) -> String {
    hex::encode(Md5::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_md5_vectors() {
        assert_eq!(checksum_payload(b""), "d41d8cd98f00b204e9800998ecf8427e");
        assert_eq!(checksum_payload(b"abc"), "900150983cd24fb0d6963f7d28e17f72");
    }
}
