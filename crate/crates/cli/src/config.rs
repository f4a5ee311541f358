//! Key=value configuration files and flag/file resolution.
//!
//! A config file supplies defaults for any value-carrying flag; flags given
//! on the command line win on conflict. Keys are case-insensitive and `-` is
//! treated as `_`, so `n-max`, `n_max`, and `N_MAX` name the same entry.
//! Unknown keys are ignored, which lets one file serve several subcommands.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, Context, Result};

/// Parsed contents of a `key=value` configuration file.
#[derive(Clone, Debug, Default)]
pub struct FileConfig {
    entries: BTreeMap<String, String>,
}

fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

impl FileConfig {
    /// An empty configuration (used when no `--config` flag is given).
    pub fn empty() -> FileConfig {
        FileConfig::default()
    }

    /// Loads a file of `key = value` lines. `#` starts a comment; blank
    /// lines are skipped. A line without `=` is an error.
    pub fn load(path: &Path) -> Result<FileConfig> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let mut entries = BTreeMap::new();
        for (line_no, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                anyhow!(
                    "{}:{}: expected `key = value`, got {:?}",
                    path.display(),
                    line_no + 1,
                    raw
                )
            })?;
            let key = normalize_key(key);
            if key.is_empty() {
                return Err(anyhow!("{}:{}: empty key", path.display(), line_no + 1));
            }
            entries.insert(key, value.trim().to_string());
        }
        Ok(FileConfig { entries })
    }

    /// Raw string value for a key, if present.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(&normalize_key(key)).map(String::as_str)
    }
}

/// Flag value if given, else the parsed config value, else `None`.
pub fn resolve<T>(flag: Option<T>, config: &FileConfig, key: &str) -> Result<Option<T>>
where
    T: FromStr,
    T::Err: Display,
{
    if flag.is_some() {
        return Ok(flag);
    }
    match config.get(key) {
        Some(s) => s
            .parse()
            .map(Some)
            .map_err(|e| anyhow!("config key `{key}`: cannot parse {s:?}: {e}")),
        None => Ok(None),
    }
}

/// Like [`resolve`], but missing everywhere is an error.
pub fn require<T>(flag: Option<T>, config: &FileConfig, key: &str) -> Result<T>
where
    T: FromStr,
    T::Err: Display,
{
    resolve(flag, config, key)?.ok_or_else(|| {
        anyhow!(
            "missing required parameter `{key}` (pass --{} or set it in the config file)",
            key.replace('_', "-")
        )
    })
}

/// Like [`resolve`], but falls back to a default value.
pub fn or_default<T>(flag: Option<T>, config: &FileConfig, key: &str, default: T) -> Result<T>
where
    T: FromStr,
    T::Err: Display,
{
    Ok(resolve(flag, config, key)?.unwrap_or(default))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(contents: &str) -> tempfile_path::TempPath {
        let mut f = tempfile_path::TempPath::new("cfg");
        f.file.write_all(contents.as_bytes()).unwrap();
        f
    }

    /// Minimal self-cleaning temp file, enough for these tests.
    mod tempfile_path {
        use std::fs::File;
        use std::path::PathBuf;

        pub struct TempPath {
            pub path: PathBuf,
            pub file: File,
        }

        impl TempPath {
            pub fn new(tag: &str) -> TempPath {
                let path = std::env::temp_dir().join(format!(
                    "blockspin-test-{}-{}-{}",
                    tag,
                    std::process::id(),
                    std::time::SystemTime::now()
                        .duration_since(std::time::UNIX_EPOCH)
                        .unwrap()
                        .as_nanos()
                ));
                let file = File::create(&path).unwrap();
                TempPath { path, file }
            }
        }

        impl Drop for TempPath {
            fn drop(&mut self) {
                let _ = std::fs::remove_file(&self.path);
            }
        }
    }

    #[test]
    fn parses_comments_aliases_and_values() {
        let f = write_temp("# header\nnu = 2\nn-max=5 # trailing\n\nLAMBDA = 0.25\n");
        let cfg = FileConfig::load(&f.path).unwrap();
        assert_eq!(cfg.get("nu"), Some("2"));
        assert_eq!(cfg.get("n_max"), Some("5"));
        assert_eq!(cfg.get("n-max"), Some("5"));
        assert_eq!(cfg.get("lambda"), Some("0.25"));
        assert_eq!(cfg.get("missing"), None);
    }

    #[test]
    fn flags_win_over_config() {
        let f = write_temp("nu = 2\n");
        let cfg = FileConfig::load(&f.path).unwrap();
        assert_eq!(require(Some(7u32), &cfg, "nu").unwrap(), 7);
        assert_eq!(require::<u32>(None, &cfg, "nu").unwrap(), 2);
        assert_eq!(or_default::<u32>(None, &cfg, "other", 9).unwrap(), 9);
        assert!(require::<u32>(None, &cfg, "other").is_err());
    }

    #[test]
    fn bad_lines_and_bad_values_error() {
        let f = write_temp("just words\n");
        assert!(FileConfig::load(&f.path).is_err());
        let f = write_temp("nu = banana\n");
        let cfg = FileConfig::load(&f.path).unwrap();
        assert!(require::<u32>(None, &cfg, "nu").is_err());
    }
}
