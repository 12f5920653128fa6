use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::warc::{HttpResponseSpec, WarcWriter};

/// Parameters for a deterministic synthetic crawl.
pub struct SiteSpec {
    pub pages: usize,
    pub domains: Vec<String>,
    pub max_links_per_page: usize,
    pub seed: u64,
    /// Interleave one request record per page, as real crawls do.
    pub interleave_requests: bool,
}

impl SiteSpec {
    pub fn small(pages: usize, seed: u64) -> Self {
        SiteSpec {
            pages,
            domains: vec![
                "alpha.example".into(),
                "beta.example".into(),
                "gamma.example".into(),
                "delta.example".into(),
                "epsilon.example".into(),
                "zeta.example".into(),
                "eta.example".into(),
                "theta.example".into(),
            ],
            max_links_per_page: 4,
            seed,
            interleave_requests: false,
        }
    }
}

pub struct SiteLink {
    /// Absolute resolved destination, as a link extractor must report it.
    pub dest_url: String,
    pub dest_domain: String,
    pub anchor: String,
}

pub struct SitePage {
    pub url: String,
    /// Bare domain (no www prefix), known at generation time.
    pub domain: String,
    pub date_iso: String,
    pub date14: String,
    pub crawl_date8: String,
    pub html: String,
    /// What a tag-stripping, whitespace-collapsing text extractor must yield.
    pub expected_text: String,
    pub links: Vec<SiteLink>,
}

pub struct SyntheticSite {
    pub pages: Vec<SitePage>,
}

/// Everything the assertions need, precomputed at generation time so no
/// production parsing code participates in the expected values.
pub struct SiteManifest {
    pub page_count: u64,
    pub domain_counts: BTreeMap<String, u64>,
    /// Every anchor written: (src url, resolved dest url, anchor text).
    pub anchors: Vec<(String, String, String)>,
    /// (src domain, dest domain) -> multiplicity, both sides non-empty.
    pub edge_counts: BTreeMap<(String, String), u64>,
    /// (crawl_date8, domain, url, text) per page, in write order.
    pub text_rows: Vec<(String, String, String, String)>,
}

const WORDS: &[&str] = &[
    "archive", "quebec", "environment", "ministry", "heritage", "crawl", "record", "trudeau",
    "ottawa", "policy", "river", "report",
];

fn page_path(idx: usize) -> String {
    format!("/p{:04}.html", idx)
}

impl SyntheticSite {
    pub fn generate(spec: &SiteSpec) -> SyntheticSite {
        assert!(!spec.domains.is_empty(), "need at least one domain");
        let mut rng = StdRng::seed_from_u64(spec.seed);

        // Fix each page's domain and host up front so links can resolve.
        let assignments: Vec<(usize, bool)> = (0..spec.pages)
            .map(|_| (rng.gen_range(0..spec.domains.len()), rng.gen_bool(0.3)))
            .collect();
        let urls: Vec<String> = assignments
            .iter()
            .enumerate()
            .map(|(i, (d, www))| {
                let host = if *www {
                    format!("www.{}", spec.domains[*d])
                } else {
                    spec.domains[*d].clone()
                };
                format!("http://{}{}", host, page_path(i))
            })
            .collect();

        let mut pages = Vec::with_capacity(spec.pages);
        for i in 0..spec.pages {
            let (domain_idx, _) = assignments[i];
            let domain = spec.domains[domain_idx].clone();
            let url = urls[i].clone();
            let day = (i % 7) + 1;
            let date_iso = format!("2014-09-0{}T12:00:00Z", day);
            let date14 = format!("2014090{}120000", day);
            let crawl_date8 = date14[..8].to_string();

            let title = format!("page-{:04}", i);
            let n_words = rng.gen_range(3..=8);
            let body_words: Vec<&str> = (0..n_words)
                .map(|_| WORDS[rng.gen_range(0..WORDS.len())])
                .collect();

            let n_links = if spec.pages > 1 {
                rng.gen_range(0..=spec.max_links_per_page)
            } else {
                0
            };
            let mut links = Vec::with_capacity(n_links);
            let mut link_html = String::new();
            for l in 0..n_links {
                let target = rng.gen_range(0..spec.pages);
                let anchor = format!("go-{:04}-{}", target, l);
                // A mix of absolute and same-host relative hrefs.
                let relative = rng.gen_bool(0.4) && target != i;
                let (href, dest_url) = if relative && urls[target].starts_with("http://") {
                    // Relative hrefs only make sense for same-host targets;
                    // resolve against this page's host instead.
                    let path = page_path(target);
                    let base_host_end = url[7..].find('/').map(|p| p + 7).unwrap_or(url.len());
                    (path.clone(), format!("{}{}", &url[..base_host_end], path))
                } else {
                    (urls[target].clone(), urls[target].clone())
                };
                let dest_domain = if dest_url == urls[target] {
                    spec.domains[assignments[target].0].clone()
                } else {
                    domain.clone()
                };
                link_html.push_str(&format!("<a href=\"{}\">{}</a> ", href, anchor));
                links.push(SiteLink {
                    dest_url,
                    dest_domain,
                    anchor,
                });
            }
            // Non-harvestable hrefs that extractors must drop.
            link_html.push_str("<a href=\"#top\">top</a><a href=\"mailto:x@y.z\">mail</a>");

            let html = format!(
                "<html><head><title>{title}</title><style>p{{color:red}}</style>\
                 <script>var x=1;</script></head>\n<body><h1>{title}</h1>\
                 <p>{words}</p>\n{links}<!-- generated fixture --></body></html>",
                title = title,
                words = body_words.join(" "),
                links = link_html,
            );

            let mut text_parts: Vec<String> = vec![title.clone(), title.clone()];
            text_parts.extend(body_words.iter().map(|w| w.to_string()));
            text_parts.extend(links.iter().map(|l| l.anchor.clone()));
            text_parts.push("top".into());
            text_parts.push("mail".into());
            let expected_text = text_parts.join(" ");

            pages.push(SitePage {
                url,
                domain,
                date_iso,
                date14,
                crawl_date8,
                html,
                expected_text,
                links,
            });
        }
        SyntheticSite { pages }
    }

    pub fn manifest(&self) -> SiteManifest {
        let mut domain_counts = BTreeMap::new();
        let mut anchors = Vec::new();
        let mut edge_counts = BTreeMap::new();
        let mut text_rows = Vec::new();
        for p in &self.pages {
            *domain_counts.entry(p.domain.clone()).or_insert(0) += 1;
            for l in &p.links {
                anchors.push((p.url.clone(), l.dest_url.clone(), l.anchor.clone()));
                *edge_counts
                    .entry((p.domain.clone(), l.dest_domain.clone()))
                    .or_insert(0) += 1;
            }
            text_rows.push((
                p.crawl_date8.clone(),
                p.domain.clone(),
                p.url.clone(),
                p.expected_text.clone(),
            ));
        }
        SiteManifest {
            page_count: self.pages.len() as u64,
            domain_counts,
            anchors,
            edge_counts,
            text_rows,
        }
    }

    /// Write the site into `n_files` WARC files under `dir`, round-robin.
    pub fn write_warc_files(
        &self,
        dir: &Path,
        n_files: usize,
        gzip: bool,
        interleave_requests: bool,
    ) -> io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let ext = if gzip { "warc.gz" } else { "warc" };
        let mut writers: Vec<(PathBuf, WarcWriter<BufWriter<File>>)> = (0..n_files.max(1))
            .map(|i| {
                let path = dir.join(format!("site-{:03}.{}", i, ext));
                let file = BufWriter::new(File::create(&path)?);
                let w = if gzip {
                    WarcWriter::new_gzip(file)
                } else {
                    WarcWriter::new(file)
                };
                Ok((path, w))
            })
            .collect::<io::Result<Vec<_>>>()?;

        let n_writers = writers.len();
        for (i, page) in self.pages.iter().enumerate() {
            let (_, w) = &mut writers[i % n_writers];
            if interleave_requests {
                w.write_request(&page.url, &page.date_iso)?;
            }
            let http = HttpResponseSpec::html(page.html.as_bytes());
            w.write_response(&page.url, &page.date_iso, &http)?;
        }
        writers
            .into_iter()
            .map(|(path, w)| {
                w.into_inner().into_inner().map(|_| path).map_err(|e| e.into_error())
            })
            .collect()
    }
}

pub struct LargeCollectionSummary {
    pub files: Vec<PathBuf>,
    pub page_count: u64,
    pub domain_counts: BTreeMap<String, u64>,
    pub link_count: u64,
    pub uncompressed_bytes: u64,
}

/// Stream a large gzipped collection to disk without holding pages in memory.
/// Bodies are repetitive filler, so the on-disk .gz files stay small while the
/// decompressed stream reaches `target_uncompressed_bytes`.
pub fn write_large_collection(
    dir: &Path,
    target_uncompressed_bytes: u64,
    seed: u64,
) -> io::Result<LargeCollectionSummary> {
    std::fs::create_dir_all(dir)?;
    let domains = ["bulk-a.example", "bulk-b.example", "bulk-c.example", "bulk-d.example"];
    let mut rng = StdRng::seed_from_u64(seed);
    let per_file: u64 = 64 * 1024 * 1024;
    let filler = "archived content block ".repeat(2000); // ~46 KB per page body

    let mut files = Vec::new();
    let mut domain_counts = BTreeMap::new();
    let mut page_count = 0u64;
    let mut link_count = 0u64;
    let mut written = 0u64;
    let mut file_idx = 0usize;

    while written < target_uncompressed_bytes {
        let path = dir.join(format!("bulk-{:03}.warc.gz", file_idx));
        let mut w = WarcWriter::new_gzip(BufWriter::new(File::create(&path)?));
        let mut in_file = 0u64;
        while in_file < per_file && written < target_uncompressed_bytes {
            let d = domains[rng.gen_range(0..domains.len())];
            let url = format!("http://{}/bulk{:07}.html", d, page_count);
            let dest = format!("http://{}/bulk{:07}.html", domains[rng.gen_range(0..domains.len())], rng.gen_range(0..1_000_000));
            let html = format!(
                "<html><body><p>{}</p><a href=\"{}\">next</a><a href=\"/self.html\">self</a></body></html>",
                filler, dest
            );
            let http = HttpResponseSpec::html(html.as_bytes());
            w.write_response(&url, "2015-03-01T00:00:00Z", &http)?;
            let rec_bytes = html.len() as u64 + 400;
            in_file += rec_bytes;
            written += rec_bytes;
            page_count += 1;
            link_count += 2;
            *domain_counts.entry(d.to_string()).or_insert(0) += 1;
        }
        w.into_inner().into_inner().map_err(|e| e.into_error())?;
        files.push(path);
        file_idx += 1;
    }

    Ok(LargeCollectionSummary {
        files,
        page_count,
        domain_counts,
        link_count,
        uncompressed_bytes: written,
    })
}
