//! Binary checkpoint container.
//!
//! Layout (all integers u32 little-endian, floats f64 little-endian):
//!
//! ```text
//! "CAMOXNN1"  version
//! window  conv_channels[3]  hidden
//! tensor_count  { rank  dims[rank] } × tensor_count
//! parameters, flat, in declaration order
//! channel mean[3]  channel std[3]
//! config_len  config JSON (UTF-8)
//! ```

use std::io::{Read, Write};
use std::path::Path;

use super::{Architecture, Network, NnError, Result, PARAM_TENSORS};
use crate::ingest::ChannelStats;

pub const MAGIC: &[u8; 8] = b"CAMOXNN1";
pub const VERSION: u32 = 1;

fn bad(msg: impl Into<String>) -> NnError {
    NnError::Checkpoint(msg.into())
}

fn put_u32(w: &mut impl Write, v: u32) -> Result<()> {
    Ok(w.write_all(&v.to_le_bytes())?)
}

fn put_f64s(w: &mut impl Write, xs: &[f64]) -> Result<()> {
    for x in xs {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

fn get_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(|e| bad(format!("truncated header: {e}")))?;
    Ok(u32::from_le_bytes(b))
}

fn get_f64s(r: &mut impl Read, out: &mut [f64]) -> Result<()> {
    let mut b = [0u8; 8];
    for x in out.iter_mut() {
        r.read_exact(&mut b).map_err(|e| bad(format!("truncated parameters: {e}")))?;
        *x = f64::from_le_bytes(b);
    }
    Ok(())
}

/// Serializes `net` plus an opaque configuration echo.
pub fn write(w: &mut impl Write, net: &Network, config_json: &str) -> Result<()> {
    w.write_all(MAGIC)?;
    put_u32(w, VERSION)?;
    let a = net.arch;
    for v in [a.window, a.conv_channels[0], a.conv_channels[1], a.conv_channels[2], a.hidden] {
        put_u32(w, v as u32)?;
    }
    let shapes = a.param_shapes();
    put_u32(w, PARAM_TENSORS as u32)?;
    for s in &shapes {
        put_u32(w, s.len() as u32)?;
        for &d in s {
            put_u32(w, d as u32)?;
        }
    }
    for p in net.params() {
        put_f64s(w, p)?;
    }
    put_f64s(w, &net.channel_stats.mean)?;
    put_f64s(w, &net.channel_stats.std)?;
    put_u32(w, config_json.len() as u32)?;
    w.write_all(config_json.as_bytes())?;
    Ok(())
}

/// Inverse of [`write`]; returns the network and its configuration echo.
pub fn read(r: &mut impl Read) -> Result<(Network, String)> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(|_| bad("file too short for magic"))?;
    if &magic != MAGIC {
        return Err(bad(format!("bad magic {:?}", String::from_utf8_lossy(&magic))));
    }
    let version = get_u32(r)?;
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let mut dims = [0usize; 5];
    for d in dims.iter_mut() {
        *d = get_u32(r)? as usize;
    }
    let arch = Architecture {
        window: dims[0],
        conv_channels: [dims[1], dims[2], dims[3]],
        hidden: dims[4],
    };
    arch.validate()?;
    let count = get_u32(r)? as usize;
    if count != PARAM_TENSORS {
        return Err(bad(format!("expected {PARAM_TENSORS} tensors, found {count}")));
    }
    for (i, expected) in arch.param_shapes().iter().enumerate() {
        let rank = get_u32(r)? as usize;
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank.min(8) {
            shape.push(get_u32(r)? as usize);
        }
        if &shape != expected {
            return Err(bad(format!("tensor {i}: shape {shape:?}, architecture implies {expected:?}")));
        }
    }
    let mut net = Network::zeros(arch, ChannelStats::IDENTITY)?;
    for p in net.params_mut() {
        get_f64s(r, p)?;
    }
    let mut stats = [0.0; 6];
    get_f64s(r, &mut stats)?;
    net.channel_stats = ChannelStats {
        mean: [stats[0], stats[1], stats[2]],
        std: [stats[3], stats[4], stats[5]],
    };
    let len = get_u32(r)? as usize;
    let mut cfg = vec![0u8; len];
    r.read_exact(&mut cfg).map_err(|_| bad("truncated config echo"))?;
    let cfg = String::from_utf8(cfg).map_err(|_| bad("config echo is not UTF-8"))?;
    Ok((net, cfg))
}

pub fn save(path: &Path, net: &Network, config_json: &str) -> Result<()> {
    let mut buf = Vec::new();
    write(&mut buf, net, config_json)?;
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<(Network, String)> {
    let bytes = std::fs::read(path)?;
    read(&mut bytes.as_slice())
}
