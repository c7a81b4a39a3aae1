use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::Crossbar;
use crate::device::{perturb_params, MemristorState};
use crate::error::{Error, Result};

/// Faults and device-to-device variation applied before training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FaultSpec {
    /// Fraction of devices frozen at a random state.
    pub stuck_fraction: f64,
    /// Relative standard dispersion of R_on and R_off.
    #[serde(rename = "dispersion_R")]
    pub dispersion_r: f64,
    /// Relative standard dispersion of both switching thresholds.
    #[serde(rename = "dispersion_Vt")]
    pub dispersion_vt: f64,
    pub seed: u64,
}

impl Default for FaultSpec {
    fn default() -> Self {
        Self {
            stuck_fraction: 0.0,
            dispersion_r: 0.0,
            dispersion_vt: 0.0,
            seed: 2024,
        }
    }
}

impl FaultSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("stuck_fraction", self.stuck_fraction),
            ("dispersion_R", self.dispersion_r),
            ("dispersion_Vt", self.dispersion_vt),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(
                    format!("fault.{name}"),
                    format!("must lie in [0, 1], got {v}"),
                ));
            }
        }
        Ok(())
    }

    pub fn is_clean(&self) -> bool {
        self.stuck_fraction == 0.0 && self.dispersion_r == 0.0 && self.dispersion_vt == 0.0
    }
}

/// Freezes `round(fraction * n * m)` distinct devices at a uniformly drawn
/// state. Returns the `(column, row)` positions, in draw order.
pub fn inject_stuck<R: Rng + ?Sized>(
    xb: &mut Crossbar,
    fraction: f64,
    rng: &mut R,
) -> Result<Vec<(usize, usize)>> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::invalid(format!(
            "stuck fraction must lie in [0, 1], got {fraction}"
        )));
    }
    let (n, m) = (xb.rows(), xb.cols());
    let total = n * m;
    let count = (fraction * total as f64).round() as usize;
    let mut cells = Vec::with_capacity(count);
    for k in index::sample(rng, total, count.min(total)) {
        let (j, i) = (k / n, k % n);
        let p = *xb.device_params(j, i);
        let w = rng.random_range(p.w_min()..=p.w_max());
        xb.set_device(j, i, MemristorState { w, stuck: true });
        cells.push((j, i));
    }
    Ok(cells)
}

/// Draws independent per-device parameters around each device's current
/// parameters.
pub fn apply_variation<R: Rng + ?Sized>(
    xb: &mut Crossbar,
    dispersion_r: f64,
    dispersion_vt: f64,
    rng: &mut R,
) -> Result<()> {
    if dispersion_r == 0.0 && dispersion_vt == 0.0 {
        return Ok(());
    }
    for j in 0..xb.cols() {
        for i in 0..xb.rows() {
            let p = perturb_params(xb.device_params(j, i), dispersion_r, dispersion_vt, rng)?;
            xb.set_device_params(j, i, p);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::MemristorParams;
    use crate::seed::rng_for;

    fn xb() -> Crossbar {
        Crossbar::new(12, 3, MemristorParams::default(), 1.0).unwrap()
    }

    #[test]
    fn zero_fraction_sticks_nothing() {
        let mut x = xb();
        assert!(inject_stuck(&mut x, 0.0, &mut rng_for(1, "t")).unwrap().is_empty());
        assert!(x.devices().iter().all(|d| !d.stuck));
    }

    #[test]
    fn twenty_percent_of_iris_array_is_seven_devices() {
        let mut x = xb();
        let cells = inject_stuck(&mut x, 0.2, &mut rng_for(1, "t")).unwrap();
        assert_eq!(cells.len(), 7);
        assert_eq!(x.devices().iter().filter(|d| d.stuck).count(), 7);
        let p = MemristorParams::default();
        for d in x.devices() {
            assert!(d.w >= p.w_min() && d.w <= p.w_max());
        }
    }

    #[test]
    fn same_seed_same_stuck_set() {
        let (mut a, mut b) = (xb(), xb());
        let ca = inject_stuck(&mut a, 0.3, &mut rng_for(9, "s")).unwrap();
        let cb = inject_stuck(&mut b, 0.3, &mut rng_for(9, "s")).unwrap();
        assert_eq!(ca, cb);
        assert_eq!(a.devices(), b.devices());
    }

    #[test]
    fn rejects_bad_fraction_and_spec() {
        assert!(inject_stuck(&mut xb(), 1.5, &mut rng_for(1, "t")).is_err());
        let spec = FaultSpec {
            dispersion_vt: -0.1,
            ..FaultSpec::default()
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn variation_changes_every_device() {
        let mut x = xb();
        apply_variation(&mut x, 0.1, 0.1, &mut rng_for(3, "v")).unwrap();
        let p0 = MemristorParams::default();
        assert!(x.params().iter().all(|p| p.r_on != p0.r_on && p.is_physical()));
    }
}
