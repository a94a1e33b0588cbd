//! Counter-based random streams.
//!
//! Every Monte Carlo sample owns a stream addressed by
//! `(seed, level, sample_index, lane)`. The stream is Philox-4x32-10 keyed by
//! the seed, with the remaining coordinates packed into the counter, so any
//! sample can be regenerated in isolation and results do not depend on how
//! samples are spread over threads.

use crate::error::{Error, Result};

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

#[inline(always)]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = u64::from(a) * u64::from(b);
    ((p >> 32) as u32, p as u32)
}

/// One Philox-4x32 block with 10 rounds.
#[inline]
pub fn philox4x32_10(counter: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut c = counter;
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(PHILOX_W0);
            k[1] = k[1].wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, c[0]);
        let (hi1, lo1) = mulhilo(PHILOX_M1, c[2]);
        c = [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0];
    }
    c
}

/// Identifies one stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    pub level: u16,
    pub sample_index: u64,
    pub lane: u16,
}

/// Deterministic stream of uniforms for one sample.
#[derive(Debug, Clone)]
pub struct RngStream {
    key: [u32; 2],
    tag: u32,
    sample: [u32; 2],
    block: u32,
    buf: [u32; 4],
    pos: usize,
}

impl RngStream {
    pub fn new(key: StreamKey) -> Self {
        Self {
            key: [key.seed as u32, (key.seed >> 32) as u32],
            tag: (u32::from(key.level) << 16) | u32::from(key.lane),
            sample: [key.sample_index as u32, (key.sample_index >> 32) as u32],
            block: 0,
            buf: [0; 4],
            pos: 4,
        }
    }

    pub fn with_lane(seed: u64, level: u16, sample_index: u64, lane: u16) -> Self {
        Self::new(StreamKey {
            seed,
            level,
            sample_index,
            lane,
        })
    }

    #[inline]
    fn refill(&mut self) {
        self.buf = philox4x32_10([self.block, self.tag, self.sample[0], self.sample[1]], self.key);
        // 2^32 blocks (2^33 uniforms) per stream before the counter wraps
        self.block = self.block.wrapping_add(1);
        self.pos = 0;
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        if self.pos >= 4 {
            self.refill();
        }
        let lo = u64::from(self.buf[self.pos]);
        let hi = u64::from(self.buf[self.pos + 1]);
        self.pos += 2;
        (hi << 32) | lo
    }

    /// Uniform in `[0, 1)` with 53 random bits; never returns 1.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Exponential holding time `-ln(1 - U) / rate`; `+inf` when `rate == 0`
    /// (no uniform is consumed in that case).
    #[inline]
    pub fn exponential(&mut self, rate: f64) -> f64 {
        if rate == 0.0 {
            return f64::INFINITY;
        }
        -(1.0 - self.uniform()).ln() / rate
    }

    /// Checked variant of [`exponential`](Self::exponential).
    pub fn try_exponential(&mut self, rate: f64) -> Result<f64> {
        if rate.is_nan() || rate < 0.0 {
            return Err(Error::InvalidValue(format!("exponential rate {rate} must be >= 0")));
        }
        Ok(self.exponential(rate))
    }
}

/// The stream for sample `sample_index` of `level` under `seed`.
pub fn stream_for(seed: u64, level: u16, sample_index: u64) -> RngStream {
    RngStream::with_lane(seed, level, sample_index, 0)
}
