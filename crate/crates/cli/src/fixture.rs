//! Deterministic synthetic archive in the cleaned-table format.
//!
//! Hourly solar-wind drivers plus an integer-valued storm-time index that
//! responds to southward magnetic field: quiet stretches, occasional storms
//! with sharp main phases and slow recoveries, and telemetry dropouts
//! encoded as the usual fill sentinels. Exercises the whole pipeline —
//! fills, monthly splits, forecasting, the warp measure — without any real
//! data, and reproduces byte-for-byte from the seed.

use anyhow::Result;
use dstlab_core::{FeatureFrame, Hour, Series};
use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::stamp::Stamp;

#[derive(Debug, Clone)]
pub struct FixtureSpec {
    pub hours: usize,
    pub seed: u64,
    pub start: Hour,
    /// Probability that any one driver cell is replaced by its fill value.
    pub fill_fraction: f64,
}

/// One generated driver column: values plus a validity mask (false where a
/// fill sentinel was injected).
#[derive(Debug, Clone)]
struct Driver {
    name: &'static str,
    sentinel: f64,
    values: Vec<f64>,
    valid: Vec<bool>,
}

/// A generated archive, convertible to CSV or directly to a feature frame.
#[derive(Debug, Clone)]
pub struct Fixture {
    start: Hour,
    drivers: Vec<Driver>,
    dst: Vec<i64>,
}

/// Generate the fixture. All randomness comes from one seeded generator, so
/// equal specs produce equal fixtures.
pub fn generate(spec: &FixtureSpec) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal = |rng: &mut ChaCha8Rng| -> f64 { StandardNormal.sample(rng) };

    let n = spec.hours;
    let mut v_sw = Vec::with_capacity(n);
    let mut rho_sw = Vec::with_capacity(n);
    let mut b_z = Vec::with_capacity(n);
    let mut b_mag = Vec::with_capacity(n);
    let mut dst = Vec::with_capacity(n);

    // AR(1)-style states; the index integrates the southward coupling.
    let mut v = 420.0;
    let mut rho = 5.0;
    let mut bz = 0.0;
    let mut bmag = 5.5;
    let mut index = -10.0;
    let mut storm_hours = 0usize;

    for _ in 0..n {
        if storm_hours == 0 && rng.gen_bool(1.0 / 600.0) {
            storm_hours = rng.gen_range(8..36);
        }
        let drive = if storm_hours > 0 {
            storm_hours -= 1;
            rng.gen_range(4.0..12.0)
        } else {
            0.0
        };

        v = (0.997 * v + 1.5 * normal(&mut rng) + 1.26 + 0.4 * drive).clamp(250.0, 850.0);
        rho = (0.99 * rho + 0.25 * normal(&mut rng) + 0.05).clamp(0.3, 40.0);
        bz = (0.92 * bz + 1.3 * normal(&mut rng) - 0.6 * drive).clamp(-30.0, 30.0);
        bmag = (0.95 * bmag + 0.5 * normal(&mut rng) + 0.27 + 0.3 * drive).clamp(1.0, 30.0);
        bmag = bmag.max(bz.abs() + 0.3);

        let coupling = (v / 400.0) * (-bz).max(0.0);
        index = (0.985 * index - 0.45 * coupling + 1.1 * normal(&mut rng) - 0.15)
            .clamp(-600.0, 80.0);

        // Store what the CSV will carry (two decimals), so the in-memory
        // frame and a re-ingested CSV agree bit for bit. Dividing the
        // rounded integer by 100 and parsing the printed decimal both yield
        // the f64 nearest the exact two-decimal value.
        let quantized = |x: f64| (x * 100.0).round() / 100.0;
        v_sw.push(quantized(v));
        rho_sw.push(quantized(rho));
        b_z.push(quantized(bz));
        b_mag.push(quantized(bmag));
        dst.push(index.round() as i64);
    }

    let mut drivers = vec![
        Driver { name: "v_sw", sentinel: 9999.0, values: v_sw, valid: vec![true; n] },
        Driver { name: "rho_sw", sentinel: 999.9, values: rho_sw, valid: vec![true; n] },
        Driver { name: "b_z", sentinel: 999.9, values: b_z, valid: vec![true; n] },
        Driver { name: "b_mag", sentinel: 999.9, values: b_mag, valid: vec![true; n] },
    ];

    // Isolated per-cell fills, plus occasional multi-hour dropouts hitting
    // every driver at once. The index column stays complete: the toolkit
    // treats the target as gap-free within a contiguous stretch.
    let mut dropout = 0usize;
    for i in 0..n {
        if dropout == 0 && rng.gen_bool(1.0 / 2000.0) {
            dropout = rng.gen_range(3..30);
        }
        let all_out = dropout > 0;
        if all_out {
            dropout -= 1;
        }
        for d in drivers.iter_mut() {
            if all_out || rng.gen_bool(spec.fill_fraction) {
                d.values[i] = d.sentinel;
                d.valid[i] = false;
            }
        }
    }

    Fixture { start: spec.start, drivers, dst }
}

impl Fixture {
    pub fn len(&self) -> usize {
        self.dst.len()
    }

    /// Render as a `timestamp,v_sw,rho_sw,b_z,b_mag,dst` CSV with fills
    /// written as their sentinel values.
    pub fn csv(&self, stamp: &Stamp) -> String {
        let mut out = stamp.csv_header();
        out.push_str("timestamp");
        for d in &self.drivers {
            out.push(',');
            out.push_str(d.name);
        }
        out.push_str(",dst\n");
        for i in 0..self.len() {
            out.push_str(&(self.start + i as i64).to_iso());
            for d in &self.drivers {
                out.push_str(&format!(",{:.2}", d.values[i]));
            }
            out.push_str(&format!(",{}\n", self.dst[i]));
        }
        out
    }

    /// The fixture as an in-memory feature frame, fills masked — exactly
    /// what ingesting the CSV form produces.
    pub fn frame(&self) -> Result<FeatureFrame<f64>> {
        let mut features = IndexMap::new();
        for d in &self.drivers {
            let values = d
                .values
                .iter()
                .zip(&d.valid)
                .map(|(&v, &ok)| if ok { v } else { f64::NAN })
                .collect();
            features.insert(d.name.to_string(), Series::new(self.start, values, d.valid.clone())?);
        }
        let dst: Vec<f64> = self.dst.iter().map(|&v| v as f64).collect();
        features.insert("dst".to_string(), Series::dense(self.start, dst)?);
        Ok(FeatureFrame::new(features)?)
    }
}
