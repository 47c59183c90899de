//! Plain-text key–value files with `[section]` headers.
//!
//! ```text
//! # comment
//! [section]
//! key = value   # trailing comment
//! ```
//!
//! Entries before the first header belong to an unnamed section. Every entry
//! keeps its line number so that errors point at the offending line.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Document {
    pub path: PathBuf,
    pub sections: Vec<Section>,
}

impl Document {
    pub fn parse(text: &str, path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let mut sections = vec![Section {
            name: String::new(),
            line: 0,
            entries: Vec::new(),
        }];
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| Error::Parse {
                    path: path.clone(),
                    line,
                    message: format!("unterminated section header `{content}`"),
                })?;
                let name = name.trim();
                if name.is_empty() {
                    return Err(Error::Parse {
                        path: path.clone(),
                        line,
                        message: "empty section name".into(),
                    });
                }
                sections.push(Section {
                    name: name.to_string(),
                    line,
                    entries: Vec::new(),
                });
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                path: path.clone(),
                line,
                message: format!("expected `key = value`, found `{content}`"),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Parse {
                    path: path.clone(),
                    line,
                    message: "missing key".into(),
                });
            }
            let section = sections.last_mut().expect("at least one section");
            if section.entries.iter().any(|e| e.key == key) {
                return Err(Error::Parse {
                    path: path.clone(),
                    line,
                    message: format!("duplicate key `{key}` in section [{}]", section.name),
                });
            }
            section.entries.push(Entry {
                key: key.to_string(),
                value: value.trim().to_string(),
                line,
            });
        }
        if sections[0].entries.is_empty() {
            sections.remove(0);
        }
        Ok(Document { path, sections })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn sections<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Section> + 'a {
        self.sections.iter().filter(move |s| s.name == name)
    }

    pub fn section<'a>(&'a self, name: &'a str) -> Option<&'a Section> {
        self.sections(name).next()
    }

    pub fn error(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line,
            message: message.into(),
        }
    }

    /// Rejects keys outside `allowed` so that typos do not pass silently.
    pub fn check_keys(&self, section: &Section, allowed: &[&str]) -> Result<()> {
        for e in &section.entries {
            if !allowed.contains(&e.key.as_str()) {
                return Err(self.error(
                    e.line,
                    format!("unknown key `{}` in section [{}]", e.key, section.name),
                ));
            }
        }
        Ok(())
    }

    pub fn get<'a>(&self, section: &'a Section, key: &str) -> Option<&'a Entry> {
        section.entries.iter().find(|e| e.key == key)
    }

    pub fn require<'a>(&self, section: &'a Section, key: &str) -> Result<&'a Entry> {
        self.get(section, key).ok_or_else(|| {
            self.error(
                section.line,
                format!("section [{}] is missing key `{key}`", section.name),
            )
        })
    }

    pub fn value<T: FromStr>(&self, entry: &Entry) -> Result<T> {
        entry.value.parse::<T>().map_err(|_| {
            self.error(
                entry.line,
                format!("cannot parse `{}` for key `{}`", entry.value, entry.key),
            )
        })
    }

    pub fn list<T: FromStr>(&self, entry: &Entry) -> Result<Vec<T>> {
        entry
            .value
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<T>().map_err(|_| {
                    self.error(
                        entry.line,
                        format!("cannot parse `{t}` in key `{}`", entry.key),
                    )
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_comments() {
        let text = "top = 1\n# c\n[a]\nx = 2 # tail\n\n[b]\ny = hello world\n[a]\nx = 3\n";
        let doc = Document::parse(text, "t.txt").unwrap();
        assert_eq!(doc.sections.len(), 4);
        assert_eq!(doc.sections[0].name, "");
        let xs: Vec<_> = doc.sections("a").map(|s| s.entries[0].value.clone()).collect();
        assert_eq!(xs, vec!["2", "3"]);
        let b = doc.section("b").unwrap();
        assert_eq!(doc.require(b, "y").unwrap().value, "hello world");
        assert_eq!(doc.require(b, "y").unwrap().line, 7);
    }

    #[test]
    fn errors_carry_lines() {
        let err = Document::parse("[a]\nbroken line\n", "f.txt").unwrap_err();
        assert!(err.to_string().starts_with("f.txt:2:"), "{err}");
        let err = Document::parse("[a]\nx = 1\nx = 2\n", "f.txt").unwrap_err();
        assert!(err.to_string().contains("duplicate"));
        let doc = Document::parse("[a]\nx = zz\n", "f.txt").unwrap();
        let s = doc.section("a").unwrap();
        let e = doc.value::<f64>(doc.require(s, "x").unwrap()).unwrap_err();
        assert!(e.to_string().starts_with("f.txt:2:"));
        assert_eq!(e.exit_code(), 1);
    }

    #[test]
    fn lists() {
        let doc = Document::parse("[a]\nv = 1, 2 3\n", "f").unwrap();
        let s = doc.section("a").unwrap();
        let v: Vec<f64> = doc.list(doc.require(s, "v").unwrap()).unwrap();
        assert_eq!(v, vec![1.0, 2.0, 3.0]);
    }
}
