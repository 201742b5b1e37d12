//! Experimental 2D analogue on the square lattice: free mass spreads 1/4 to
//! each von Neumann neighbor, and the radially outermost alpha of the mass is
//! frozen each step.
//!
//! The freezing rule is radial by integer squared distance r^2 = x^2 + y^2:
//! whole shells freeze outside-in, and the threshold shell is split with one
//! shared proportionality factor. Because a shell is a union of dihedral
//! orbits and every cell of an orbit carries bitwise-equal mass, both the
//! split and the paired heat stencil `frozen + 0.25*((W+E) + (S+N))` commute
//! with the square's symmetries exactly in IEEE arithmetic — the grid stays
//! dihedral-symmetric to the last bit, not merely within rounding.

use std::collections::BTreeMap;

use crate::numeric::NeumaierSum;
use crate::{tol, validate_alpha, Error, Result};

/// Mass distribution on the window `[-R, R]^2`, row-major dense storage.
#[derive(Clone, Debug)]
pub struct MassGrid2D {
    alpha: f64,
    t: u64,
    radius: i64,
    cells: Vec<f64>,
}

impl MassGrid2D {
    /// Unit mass at the origin.
    pub fn delta(alpha: f64) -> Result<Self> {
        validate_alpha(alpha)?;
        Ok(Self { alpha, t: 0, radius: 0, cells: vec![1.0] })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// Window half-width R.
    pub fn radius(&self) -> i64 {
        self.radius
    }

    fn side(&self) -> usize {
        (2 * self.radius + 1) as usize
    }

    fn idx(&self, x: i64, y: i64) -> usize {
        debug_assert!(x.abs() <= self.radius && y.abs() <= self.radius);
        (y + self.radius) as usize * self.side() + (x + self.radius) as usize
    }

    /// Mass at a cell; zero outside the window.
    pub fn mass_at(&self, x: i64, y: i64) -> f64 {
        if x.abs() > self.radius || y.abs() > self.radius {
            0.0
        } else {
            self.cells[self.idx(x, y)]
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.cells.iter().copied().collect::<NeumaierSum>().value()
    }

    /// `sum m(x,y) (x^2 + y^2)`.
    pub fn radial_second_moment(&self) -> f64 {
        let mut acc = NeumaierSum::new();
        for y in -self.radius..=self.radius {
            for x in -self.radius..=self.radius {
                acc.add(self.cells[self.idx(x, y)] * (x * x + y * y) as f64);
            }
        }
        acc.value()
    }

    /// Bitwise invariance under the square's 8-element symmetry group.
    pub fn is_dihedral_symmetric(&self) -> bool {
        for y in 0..=self.radius {
            for x in 0..=y {
                let bits = self.mass_at(x, y).to_bits();
                let orbit = [
                    (-x, y),
                    (x, -y),
                    (-x, -y),
                    (y, x),
                    (-y, x),
                    (y, -x),
                    (-y, -x),
                ];
                if orbit.iter().any(|&(u, v)| self.mass_at(u, v).to_bits() != bits) {
                    return false;
                }
            }
        }
        true
    }

    /// Column of the grid at fixed x, as `(y, mass)` in ascending y.
    pub fn slice(&self, x: i64) -> Vec<(i64, f64)> {
        (-self.radius..=self.radius).map(|y| (y, self.mass_at(x, y))).collect()
    }

    /// Overwrite one cell. Test-and-diagnostics hook for fault injection;
    /// breaks the invariants the evolution maintains.
    #[doc(hidden)]
    pub fn set_cell(&mut self, x: i64, y: i64, mass: f64) {
        let i = self.idx(x, y);
        self.cells[i] = mass;
    }

    /// Cell indices grouped by squared radius.
    fn shells(&self) -> BTreeMap<u64, Vec<usize>> {
        let mut shells: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for y in -self.radius..=self.radius {
            for x in -self.radius..=self.radius {
                shells.entry((x * x + y * y) as u64).or_default().push(self.idx(x, y));
            }
        }
        shells
    }
}

/// Free/frozen decomposition of a grid for one step.
#[derive(Clone, Debug)]
pub struct FrozenSplit2D {
    alpha: f64,
    t: u64,
    radius: i64,
    free: Vec<f64>,
    frozen: Vec<f64>,
    threshold_r2: u64,
}

impl FrozenSplit2D {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn radius(&self) -> i64 {
        self.radius
    }

    /// Squared radius of the partially frozen shell.
    pub fn threshold_radius2(&self) -> u64 {
        self.threshold_r2
    }

    fn side(&self) -> usize {
        (2 * self.radius + 1) as usize
    }

    fn at(&self, cells: &[f64], x: i64, y: i64) -> f64 {
        if x.abs() > self.radius || y.abs() > self.radius {
            0.0
        } else {
            cells[(y + self.radius) as usize * self.side() + (x + self.radius) as usize]
        }
    }

    pub fn free_at(&self, x: i64, y: i64) -> f64 {
        self.at(&self.free, x, y)
    }

    pub fn frozen_at(&self, x: i64, y: i64) -> f64 {
        self.at(&self.frozen, x, y)
    }

    pub fn free_total(&self) -> f64 {
        self.free.iter().copied().collect::<NeumaierSum>().value()
    }

    pub fn frozen_total(&self) -> f64 {
        self.frozen.iter().copied().collect::<NeumaierSum>().value()
    }

    #[cfg(test)]
    fn from_parts(alpha: f64, t: u64, radius: i64, free: Vec<f64>, frozen: Vec<f64>) -> Self {
        Self { alpha, t, radius, free, frozen, threshold_r2: 0 }
    }
}

/// Freeze the radially outermost alpha of the mass: whole shells from the
/// outside in, the threshold shell split proportionally with a single shared
/// fraction so every orbit freezes identically.
pub fn freeze_split_2d(grid: &MassGrid2D) -> Result<FrozenSplit2D> {
    for y in -grid.radius..=grid.radius {
        for x in -grid.radius..=grid.radius {
            let m = grid.cells[grid.idx(x, y)];
            if m < 0.0 || !m.is_finite() {
                return Err(Error::InvalidState(format!(
                    "negative or non-finite mass {m} at ({x}, {y})"
                )));
            }
        }
    }
    let mut frozen = vec![0.0; grid.cells.len()];
    let mut cum = NeumaierSum::new();
    let mut threshold_r2 = 0;
    for (&r2, indices) in grid.shells().iter().rev() {
        let shell_total: f64 = indices
            .iter()
            .map(|&i| grid.cells[i])
            .collect::<NeumaierSum>()
            .value();
        if shell_total == 0.0 {
            continue;
        }
        let need = grid.alpha - cum.value();
        threshold_r2 = r2;
        if shell_total <= need {
            for &i in indices {
                frozen[i] = grid.cells[i];
            }
            cum.add(shell_total);
        } else {
            let fraction = (need / shell_total).clamp(0.0, 1.0);
            for &i in indices {
                frozen[i] = fraction * grid.cells[i];
            }
            break;
        }
    }
    let free: Vec<f64> = grid.cells.iter().zip(&frozen).map(|(m, f)| m - f).collect();
    Ok(FrozenSplit2D {
        alpha: grid.alpha,
        t: grid.t,
        radius: grid.radius,
        free,
        frozen,
        threshold_r2,
    })
}

/// One heat step: every free cell sends 1/4 of its mass to each of its four
/// neighbors; frozen mass stays. The window grows by one only when free mass
/// sits on its boundary ring.
pub fn heat_step_2d(split: &FrozenSplit2D) -> MassGrid2D {
    let r = split.radius;
    let ring_occupied = (-r..=r).any(|v| {
        split.free_at(v, r) != 0.0
            || split.free_at(v, -r) != 0.0
            || split.free_at(r, v) != 0.0
            || split.free_at(-r, v) != 0.0
    });
    let radius = r + i64::from(ring_occupied);
    let side = (2 * radius + 1) as usize;
    let mut cells = vec![0.0; side * side];
    for y in -radius..=radius {
        for x in -radius..=radius {
            let horizontal = split.free_at(x - 1, y) + split.free_at(x + 1, y);
            let vertical = split.free_at(x, y - 1) + split.free_at(x, y + 1);
            cells[(y + radius) as usize * side + (x + radius) as usize] =
                split.frozen_at(x, y) + 0.25 * (horizontal + vertical);
        }
    }
    MassGrid2D { alpha: split.alpha, t: split.t + 1, radius, cells }
}

/// Evolve from the origin for `steps` steps, enforcing conservation,
/// bitwise dihedral symmetry, and the radial second-moment identity
/// `M_2(t) = t(1 - alpha)` after every step.
pub fn run_fbd2d(alpha: f64, steps: u64) -> Result<MassGrid2D> {
    let mut grid = MassGrid2D::delta(alpha)?;
    for _ in 0..steps {
        let split = freeze_split_2d(&grid)?;
        let budget = 1e-10 * (grid.t + 1) as f64;
        if (split.frozen_total() - alpha).abs() > budget {
            return Err(Error::InvalidState(format!(
                "frozen mass {} drifted from alpha {} at t = {}",
                split.frozen_total(),
                alpha,
                grid.t
            )));
        }
        let free_total = split.free_total();
        let m2_before = grid.radial_second_moment();
        grid = heat_step_2d(&split);
        let t = grid.t;
        let budget = 1e-10 * (t + 1) as f64;
        if (grid.total_mass() - 1.0).abs() > budget {
            return Err(Error::InvalidState(format!(
                "total mass {} at t = {t}",
                grid.total_mass()
            )));
        }
        if !grid.is_dihedral_symmetric() {
            return Err(Error::InvalidState(format!("symmetry broken at t = {t}")));
        }
        let m2 = grid.radial_second_moment();
        if (m2 - m2_before - free_total).abs() > budget {
            return Err(Error::InvalidState(format!(
                "second-moment gain {} differs from free mass {free_total} at t = {t}",
                m2 - m2_before
            )));
        }
        let expected = t as f64 * (1.0 - alpha);
        if (m2 - expected).abs() > tol::GRID2D_M2_REL * (t.max(1)) as f64 {
            return Err(Error::InvalidState(format!(
                "radial second moment {m2} differs from {expected} at t = {t}"
            )));
        }
    }
    Ok(grid)
}
