use std::io::{self, Write};

use crate::lie::Vec3;

/// Position and momentum of one particle.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ParticleState {
    pub r: Vec3,
    pub p: Vec3,
}

impl ParticleState {
    pub fn new(r: Vec3, p: Vec3) -> Self {
        Self { r, p }
    }
}

/// Phase-space points drawn from a Gibbs density, stored sample-major:
/// `states[s * n_particles + i]` is particle `i` of sample `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub n_particles: usize,
    pub states: Vec<ParticleState>,
    pub weights: Option<Vec<f64>>,
    pub seed: u64,
}

impl SampleBatch {
    pub fn empty(n_particles: usize, seed: u64) -> Self {
        Self {
            n_particles,
            states: Vec::new(),
            weights: None,
            seed,
        }
    }

    pub fn n_samples(&self) -> usize {
        if self.n_particles == 0 {
            0
        } else {
            self.states.len() / self.n_particles
        }
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn sample(&self, s: usize) -> &[ParticleState] {
        &self.states[s * self.n_particles..(s + 1) * self.n_particles]
    }

    pub fn samples(&self) -> impl Iterator<Item = &[ParticleState]> {
        self.states.chunks(self.n_particles.max(1))
    }

    /// States of one particle across all samples.
    pub fn particle(&self, i: usize) -> impl Iterator<Item = &ParticleState> {
        self.states.iter().skip(i).step_by(self.n_particles.max(1))
    }

    pub fn is_finite(&self) -> bool {
        self.states
            .iter()
            .all(|s| s.r.iter().chain(s.p.iter()).all(|v| v.is_finite()))
    }

    /// CSV with header `sample_id,particle_id,x,y,z,px,py,pz`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "sample_id,particle_id,x,y,z,px,py,pz")?;
        for (s, sample) in self.samples().enumerate() {
            for (i, st) in sample.iter().enumerate() {
                writeln!(
                    w,
                    "{s},{i},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                    st.r.x, st.r.y, st.r.z, st.p.x, st.p.y, st.p.z
                )?;
            }
        }
        Ok(())
    }
}
