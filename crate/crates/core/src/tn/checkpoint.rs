//! Binary checkpoint container for [`TnState`].
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic      8 bytes  "TNQAOATN"
//! version    u32      1
//! lat_len    u32      length of the lattice JSON document
//! lattice    lat_len bytes of UTF-8 JSON
//! chi_max    u64      0 = unbounded
//! n          u64      number of sites
//! per site:  rank u32, rank × dim u64, then Π dims × (re f64, im f64)
//!            in row-major order
//! ```

use std::io::{Read, Write};

use num_complex::Complex64 as C64;

use super::TnState;
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg::Tensor;

const MAGIC: &[u8; 8] = b"TNQAOATN";
const VERSION: u32 = 1;

pub fn write_state<W: Write>(state: &TnState, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    let lat = state.lattice().to_json()?;
    w.write_all(&(lat.len() as u32).to_le_bytes())?;
    w.write_all(lat.as_bytes())?;
    w.write_all(&(state.chi_max().unwrap_or(0) as u64).to_le_bytes())?;
    w.write_all(&(state.n() as u64).to_le_bytes())?;
    for t in state.tensors() {
        w.write_all(&(t.rank() as u32).to_le_bytes())?;
        for &d in t.shape() {
            w.write_all(&(d as u64).to_le_bytes())?;
        }
        for x in t.data() {
            w.write_all(&x.re.to_le_bytes())?;
            w.write_all(&x.im.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_bits(read_u64(r)?))
}

pub fn read_state<R: Read>(mut r: R) -> Result<TnState> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::InvalidArgument("not a TN checkpoint".into()));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::InvalidArgument(format!("unsupported checkpoint version {version}")));
    }
    let len = read_u32(&mut r)? as usize;
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    let lattice = Lattice::from_json(
        std::str::from_utf8(&buf).map_err(|_| Error::InvalidArgument("lattice header is not UTF-8".into()))?,
    )?;
    let chi = read_u64(&mut r)? as usize;
    let n = read_u64(&mut r)? as usize;
    if n != lattice.n() {
        return Err(Error::LengthMismatch { expected: lattice.n(), got: n });
    }
    let mut tensors = Vec::with_capacity(n);
    for _ in 0..n {
        let rank = read_u32(&mut r)? as usize;
        if rank > 16 {
            return Err(Error::InvalidDimensions(format!("tensor rank {rank}")));
        }
        let shape = (0..rank).map(|_| read_u64(&mut r).map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
        let len = shape.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        let len = len.filter(|&l| l <= 1 << 32).ok_or_else(|| Error::InvalidDimensions(format!("{shape:?}")))?;
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            let re = read_f64(&mut r)?;
            data.push(C64::new(re, read_f64(&mut r)?));
        }
        tensors.push(Tensor::new(shape, data));
    }
    TnState::from_parts(lattice, if chi == 0 { None } else { Some(chi) }, tensors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::random_instance;
    use crate::lattice::build_device;
    use crate::schedule::Schedule;
    use crate::tn::{evolve, EvolveConfig};

    #[test]
    fn round_trip() {
        let l = build_device("guadalupe").unwrap();
        let inst = random_instance(&l, 3);
        let s = TnState::init_plus(&l, Some(4)).unwrap();
        let r = evolve(s, &inst, &Schedule::new(vec![0.3], vec![0.2]).unwrap(), &EvolveConfig::new(Some(4))).unwrap();
        let mut buf = Vec::new();
        write_state(&r.state, &mut buf).unwrap();
        assert_eq!(read_state(buf.as_slice()).unwrap(), r.state);
        buf[0] = b'X';
        assert!(read_state(buf.as_slice()).is_err());
    }
}
