//! Versioned binary snapshots of heat states.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use sha2::{Digest, Sha256};

use super::{Bracket, HeatState, Window};
use crate::error::{Error, Result};
use crate::vertex::Vertex;

pub const CACHE_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"SPHK";

/// Heat-state snapshots keyed by (graph id, source, window radius, n).
pub struct HeatCache {
    dir: PathBuf,
}

impl HeatCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(HeatCache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn key(graph_id: &str, w: &Window, n: u32) -> String {
        format!("{graph_id}|{}|{}|{}|{n}", w.source, w.radius, w.len())
    }

    fn path(&self, key: &str) -> PathBuf {
        let digest = Sha256::digest(key.as_bytes());
        let name: String = digest.iter().take(16).map(|b| format!("{b:02x}")).collect();
        self.dir.join(format!("{name}.hks"))
    }

    pub fn store(&self, graph_id: &str, st: &HeatState) -> Result<PathBuf> {
        let key = Self::key(graph_id, st.window(), st.n);
        let path = self.path(&key);
        let tmp = path.with_extension("tmp");
        {
            let mut f = BufWriter::new(fs::File::create(&tmp)?);
            f.write_all(MAGIC)?;
            f.write_u32::<LittleEndian>(CACHE_VERSION)?;
            f.write_u32::<LittleEndian>(key.len() as u32)?;
            f.write_all(key.as_bytes())?;
            f.write_u32::<LittleEndian>(st.n)?;
            f.write_f64::<LittleEndian>(st.lost)?;
            f.write_f64::<LittleEndian>(st.killed)?;
            f.write_u64::<LittleEndian>(st.mass.len() as u64)?;
            for m in &st.mass {
                f.write_f64::<LittleEndian>(*m)?;
            }
            f.flush()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(path)
    }

    /// The stored state at time n on this window, if present and readable.
    pub fn load(&self, graph_id: &str, window: &Arc<Window>, n: u32) -> Result<Option<HeatState>> {
        let key = Self::key(graph_id, window, n);
        let path = self.path(&key);
        if !path.exists() {
            return Ok(None);
        }
        let bad = |msg: &str| Error::Cache(format!("{}: {msg}", path.display()));
        let mut f = BufReader::new(fs::File::open(&path)?);
        let mut magic = [0u8; 4];
        f.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(bad("bad magic"));
        }
        if f.read_u32::<LittleEndian>()? != CACHE_VERSION {
            return Ok(None);
        }
        let klen = f.read_u32::<LittleEndian>()? as usize;
        let mut stored = vec![0u8; klen];
        f.read_exact(&mut stored)?;
        if stored != key.as_bytes() {
            return Err(bad("key mismatch"));
        }
        let sn = f.read_u32::<LittleEndian>()?;
        let lost = f.read_f64::<LittleEndian>()?;
        let killed = f.read_f64::<LittleEndian>()?;
        let len = f.read_u64::<LittleEndian>()? as usize;
        if len != window.len() || sn != n {
            return Err(bad("shape mismatch"));
        }
        let mut mass = vec![0.0; len];
        f.read_f64_into::<LittleEndian>(&mut mass)?;
        Ok(Some(HeatState::from_parts(window.clone(), n, mass, lost, killed)))
    }
}

/// Plot-ready rows `n,x,y,lower,upper,lost`.
pub fn write_csv<W: Write>(out: &mut W, rows: &[(u32, Vertex, Vertex, Bracket, f64)]) -> std::io::Result<()> {
    writeln!(out, "n,x,y,lower,upper,lost")?;
    for (n, x, y, b, l) in rows {
        writeln!(out, "{n},\"{x}\",\"{y}\",{:.16e},{:.16e},{:.16e}", b.lower, b.upper, l)?;
    }
    Ok(())
}
