//! On-disk cache of Hall contexts: `{dir}/{algebra-hash}/{p}/registry.json` holds the root
//! modules and registry classes, `memo.json` next to it the memoized symbol products.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use iqhall::hall_engine::HallContext;
use iqhall::repmod::Caps;
use iqhall::{iquiver_algebra, IQuiver, Result};

pub const CACHE_ENV: &str = "IQHALL_CACHE_DIR";

#[derive(Clone, Debug)]
pub struct Cache {
    root: Option<PathBuf>,
}

impl Cache {
    /// Flag beats environment beats the user cache directory; `disabled` turns caching off.
    pub fn resolve(flag: Option<PathBuf>, disabled: bool) -> Cache {
        if disabled {
            return Cache { root: None };
        }
        let root = flag
            .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
            .or_else(|| std::env::var_os("XDG_CACHE_HOME").map(|d| PathBuf::from(d).join("iqhall")))
            .or_else(|| {
                std::env::var_os("HOME").map(|h| PathBuf::from(h).join(".cache").join("iqhall"))
            });
        Cache { root }
    }

    pub fn root(&self) -> Option<&Path> {
        self.root.as_deref()
    }

    fn dir(&self, hash: &str, p: u64) -> Option<PathBuf> {
        self.root.as_ref().map(|r| r.join(hash).join(p.to_string()))
    }

    /// A context over `iq` at `p`, warm-started from the cache when a usable entry exists.
    pub fn context(&self, iq: &IQuiver, p: u64, caps: Caps) -> Result<HallContext> {
        let hash = iquiver_algebra(iq)?.hash.clone();
        if let Some(dir) = self.dir(&hash, p) {
            if let Some(snap) = read_snapshot(&dir) {
                match HallContext::from_snapshot(iq, p, caps.clone(), &snap) {
                    Ok(ctx) => return Ok(ctx),
                    Err(e) => eprintln!("iq: ignoring cache entry {}: {e}", dir.display()),
                }
            }
        }
        HallContext::with_caps(iq, p, caps)
    }

    pub fn store(&self, ctx: &HallContext) -> std::io::Result<()> {
        let Some(dir) = self.dir(&ctx.alg.hash, ctx.p) else {
            return Ok(());
        };
        fs::create_dir_all(&dir)?;
        let mut snap = ctx.snapshot();
        let memo = snap
            .as_object_mut()
            .and_then(|o| o.remove("memo"))
            .unwrap_or(Value::Array(vec![]));
        let memo = json!({"algebra": ctx.alg.hash, "p": ctx.p, "memo": memo});
        write_atomic(&dir.join("registry.json"), &serde_json::to_vec(&snap)?)?;
        write_atomic(&dir.join("memo.json"), &serde_json::to_vec(&memo)?)
    }
}

fn read_snapshot(dir: &Path) -> Option<Value> {
    let mut snap: Value =
        serde_json::from_slice(&fs::read(dir.join("registry.json")).ok()?).ok()?;
    let memo: Value = fs::read(dir.join("memo.json"))
        .ok()
        .and_then(|b| serde_json::from_slice::<Value>(&b).ok())
        .and_then(|m| m.get("memo").cloned())
        .unwrap_or(Value::Array(vec![]));
    snap.as_object_mut()?.insert("memo".into(), memo);
    Some(snap)
}

/// Writes through a temporary file in the same directory and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
