use std::collections::BTreeSet;

use rand::Rng;

use crate::detect::DEFAULT_KEYWORDS;

const PACKAGES: &[&str] = &["feed", "chat", "media", "settings", "ads", "social", "search", "profile", "video", "util"];
const CLASSES: &[&str] = &["Helper", "Manager", "Store", "Cache", "View", "Adapter", "Service", "Loader", "Parser", "Worker"];
const METHODS: &[&str] = &["load", "save", "update", "render", "bind", "fetch", "parse", "sync", "clear", "open"];

/// True if `name` contains none of the default detector keywords.
pub fn keyword_free(name: &str) -> bool {
    let lower = name.to_lowercase();
    DEFAULT_KEYWORDS.iter().all(|k| !lower.contains(k))
}

/// Hands out unique function names, either readable or obfuscated.
pub struct NameGen {
    obfuscate: bool,
    used: BTreeSet<String>,
}

impl NameGen {
    pub fn new(obfuscate: bool) -> Self {
        NameGen { obfuscate, used: BTreeSet::new() }
    }

    /// `readable` is used as is unless obfuscating.
    pub fn named(&mut self, rng: &mut impl Rng, readable: &str, java: bool) -> String {
        if self.obfuscate {
            self.obfuscated(rng, java)
        } else {
            self.claim(readable.to_owned())
        }
    }

    pub fn background(&mut self, rng: &mut impl Rng, java: bool, index: usize) -> String {
        if self.obfuscate {
            return self.obfuscated(rng, java);
        }
        let pkg = PACKAGES[rng.random_range(0..PACKAGES.len())];
        let method = METHODS[rng.random_range(0..METHODS.len())];
        let name = if java {
            let class = CLASSES[rng.random_range(0..CLASSES.len())];
            format!("com.app.{pkg}.{class}{index}.{method}")
        } else {
            format!("{pkg}_{method}_{index}")
        };
        self.claim(name)
    }

    fn obfuscated(&mut self, rng: &mut impl Rng, java: bool) -> String {
        loop {
            let name = if java {
                let parts: Vec<String> = (0..3).map(|_| ident(rng, 1, 2)).collect();
                parts.join(".")
            } else {
                ident(rng, 2, 4)
            };
            if keyword_free(&name) && !self.used.contains(&name) {
                return self.claim(name);
            }
        }
    }

    fn claim(&mut self, name: String) -> String {
        let mut candidate = name.clone();
        let mut k = 2;
        while !self.used.insert(candidate.clone()) {
            candidate = format!("{name}_{k}");
            k += 1;
        }
        candidate
    }
}

fn ident(rng: &mut impl Rng, min: usize, max: usize) -> String {
    let len = rng.random_range(min..=max);
    (0..len)
        .map(|i| {
            let c = rng.random_range(b'a'..=b'z') as char;
            if i == 0 && rng.random_bool(0.3) {
                c.to_ascii_uppercase()
            } else {
                c
            }
        })
        .collect()
}
