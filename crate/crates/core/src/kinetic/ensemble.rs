use std::io::{Read, Write};
use std::path::Path;

use crate::error::{ensure_finite, Result, VnsError};
use crate::grid_spectral::pairwise_sum;
use crate::grid_spectral::snapshot::{read_f64s, read_u32, write_f64s, write_u32};

pub const ENSEMBLE_MAGIC: &[u8; 4] = b"VNSP";
pub const ENSEMBLE_VERSION: u32 = 1;

/// Weighted particles in phase space, stored as flat arrays.
///
/// Particle `i` has position `pos[i*d..(i+1)*d]`, velocity
/// `vel[i*d..(i+1)*d]` and weight `weight[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleEnsemble {
    dim: usize,
    pub pos: Vec<f64>,
    pub vel: Vec<f64>,
    pub weight: Vec<f64>,
}

impl ParticleEnsemble {
    pub fn empty(dim: usize) -> Self {
        Self { dim, pos: Vec::new(), vel: Vec::new(), weight: Vec::new() }
    }

    pub fn new(dim: usize, pos: Vec<f64>, vel: Vec<f64>, weight: Vec<f64>) -> Result<Self> {
        let n = weight.len();
        if pos.len() != n * dim || vel.len() != n * dim {
            return Err(VnsError::Mismatch("particle array lengths disagree".into()));
        }
        ensure_finite(&pos, "particle positions")?;
        ensure_finite(&vel, "particle velocities")?;
        ensure_finite(&weight, "particle weights")?;
        if weight.iter().any(|&w| w < 0.0) {
            return Err(VnsError::InvalidArgument("negative particle weight".into()));
        }
        let mut out = Self { dim, pos, vel, weight };
        out.pos.iter_mut().for_each(|x| *x = super::interp::wrap(*x));
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weight.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weight.is_empty()
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.pos[i * self.dim..(i + 1) * self.dim]
    }

    pub fn velocity(&self, i: usize) -> &[f64] {
        &self.vel[i * self.dim..(i + 1) * self.dim]
    }

    pub fn total_mass(&self) -> f64 {
        pairwise_sum(&self.weight)
    }

    /// `Σ w_i v_i`.
    pub fn momentum(&self) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (c, o) in out.iter_mut().enumerate().take(self.dim) {
            let terms: Vec<f64> = (0..self.len()).map(|i| self.weight[i] * self.vel[i * self.dim + c]).collect();
            *o = pairwise_sum(&terms);
        }
        out
    }

    pub fn write(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(ENSEMBLE_MAGIC)?;
        write_u32(w, ENSEMBLE_VERSION)?;
        write_u32(w, self.dim as u32)?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        let d = self.dim;
        let mut rec = Vec::with_capacity(2 * d + 1);
        for i in 0..self.len() {
            rec.clear();
            rec.extend_from_slice(self.position(i));
            rec.extend_from_slice(self.velocity(i));
            rec.push(self.weight[i]);
            write_f64s(w, &rec)?;
        }
        Ok(())
    }

    pub fn read(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != ENSEMBLE_MAGIC {
            return Err(VnsError::Format("bad ensemble magic".into()));
        }
        let version = read_u32(r)?;
        if version != ENSEMBLE_VERSION {
            return Err(VnsError::Format(format!("unsupported ensemble version {version}")));
        }
        let d = read_u32(r)? as usize;
        if !(d == 2 || d == 3) {
            return Err(VnsError::Format(format!("invalid dimension {d}")));
        }
        let mut nb = [0u8; 8];
        r.read_exact(&mut nb)?;
        let n = u64::from_le_bytes(nb) as usize;
        let mut pos = Vec::with_capacity(n * d);
        let mut vel = Vec::with_capacity(n * d);
        let mut weight = Vec::with_capacity(n);
        for _ in 0..n {
            let rec = read_f64s(r, 2 * d + 1)?;
            pos.extend_from_slice(&rec[..d]);
            vel.extend_from_slice(&rec[d..2 * d]);
            weight.push(rec[2 * d]);
        }
        Self::new(d, pos, vel, weight)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read(&mut r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_round_trip() {
        let e = ParticleEnsemble::new(2, vec![0.1, 0.2, 3.0, 4.0], vec![-1.0, 2.0, 0.5, 0.25], vec![0.5, 0.5])
            .unwrap();
        let mut buf = Vec::new();
        e.write(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"VNSP");
        let back = ParticleEnsemble::read(&mut buf.as_slice()).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn rejects_negative_weights() {
        assert!(ParticleEnsemble::new(2, vec![0.0; 2], vec![0.0; 2], vec![-1.0]).is_err());
    }
}
