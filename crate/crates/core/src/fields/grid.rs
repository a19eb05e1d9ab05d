use std::fmt;

use num_complex::Complex64;

use super::domain::parse_floats;
use super::FieldError;

/// Uniform node lattice over an axis-aligned box. Nodes are indexed
/// `(i, j)` with `i` along the real axis; row-major order is `j * nx + i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    nx: usize,
    ny: usize,
}

impl GridSpec {
    /// Node steps along the two axes must agree to 1e-9 relative.
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize) -> Result<Self, FieldError> {
        if !(x0 < x1 && y0 < y1) || nx < 2 || ny < 2 {
            return Err(FieldError::InvalidGrid(format!(
                "need x0<x1, y0<y1 and at least 2 nodes per axis (got {x0},{x1},{y0},{y1},{nx},{ny})"
            )));
        }
        let hx = (x1 - x0) / (nx - 1) as f64;
        let hy = (y1 - y0) / (ny - 1) as f64;
        if ((hx - hy) / hx).abs() > 1e-9 {
            return Err(FieldError::InvalidGrid(format!("non-uniform steps {hx} vs {hy}")));
        }
        Ok(GridSpec { x0, x1, y0, y1, nx, ny })
    }

    /// Square grid on `[-half, half]²` with the given step; `half/step` must
    /// be (close to) an integer.
    pub fn centered(half: f64, step: f64) -> Result<Self, FieldError> {
        let cells = (2.0 * half / step).round() as usize;
        GridSpec::new(-half, half, -half, half, cells + 1, cells + 1)
    }

    pub fn step(&self) -> f64 {
        (self.x1 - self.x0) / (self.nx - 1) as f64
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        (self.x0, self.x1, self.y0, self.y1)
    }

    pub fn node(&self, i: usize, j: usize) -> Complex64 {
        let h = self.step();
        let x = if i + 1 == self.nx { self.x1 } else { self.x0 + i as f64 * h };
        let y = if j + 1 == self.ny { self.y1 } else { self.y0 + j as f64 * h };
        Complex64::new(x, y)
    }

    pub fn node_at(&self, k: usize) -> Complex64 {
        self.node(k % self.nx, k / self.nx)
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn nodes(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.len()).map(move |k| self.node_at(k))
    }

    /// The same box with every `stride`-th node.
    pub fn coarsened(&self, stride: usize) -> Result<Self, FieldError> {
        if stride == 0 || (self.nx - 1) % stride != 0 || (self.ny - 1) % stride != 0 {
            return Err(FieldError::InvalidGrid(format!("stride {stride} does not divide the grid")));
        }
        GridSpec::new(self.x0, self.x1, self.y0, self.y1, (self.nx - 1) / stride + 1, (self.ny - 1) / stride + 1)
    }

    /// The same box with twice the resolution.
    pub fn refined(&self) -> Self {
        GridSpec { nx: 2 * self.nx - 1, ny: 2 * self.ny - 1, ..*self }
    }

    /// Cell `(i, j)` is `[x_i, x_{i+1}] × [y_j, y_{j+1}]`; returns the cell
    /// holding `z` under half-open assignment (last row/column closed).
    pub fn cell_of(&self, z: Complex64) -> Option<(usize, usize)> {
        let h = self.step();
        if z.re < self.x0 || z.re > self.x1 || z.im < self.y0 || z.im > self.y1 {
            return None;
        }
        let i = (((z.re - self.x0) / h).floor() as usize).min(self.nx - 2);
        let j = (((z.im - self.y0) / h).floor() as usize).min(self.ny - 2);
        Some((i, j))
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{},{},{}", self.x0, self.x1, self.y0, self.y1, self.nx, self.ny)
    }
}

impl std::str::FromStr for GridSpec {
    type Err = FieldError;

    /// `x0,x1,y0,y1,nx,ny`
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v = parse_floats(s).map_err(FieldError::InvalidGrid)?;
        if v.len() != 6 {
            return Err(FieldError::InvalidGrid(format!("expected x0,x1,y0,y1,nx,ny, got `{s}`")));
        }
        let count = |x: f64| {
            if x.fract() == 0.0 && x >= 2.0 {
                Ok(x as usize)
            } else {
                Err(FieldError::InvalidGrid(format!("node count `{x}` is not an integer >= 2")))
            }
        };
        GridSpec::new(v[0], v[1], v[2], v[3], count(v[4])?, count(v[5])?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_uniform_steps() {
        assert!(GridSpec::new(0.0, 1.0, 0.0, 2.0, 11, 11).is_err());
        assert!(GridSpec::new(0.0, 1.0, 0.0, 2.0, 11, 21).is_ok());
    }

    #[test]
    fn corners_are_exact() {
        let g = GridSpec::centered(1.0, 1.0 / 256.0).unwrap();
        assert_eq!(g.nx(), 513);
        assert_eq!(g.node(0, 0), Complex64::new(-1.0, -1.0));
        assert_eq!(g.node(512, 512), Complex64::new(1.0, 1.0));
        assert_eq!(g.node(256, 256), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn cell_lookup_is_half_open() {
        let g = GridSpec::new(0.0, 1.0, 0.0, 1.0, 3, 3).unwrap();
        assert_eq!(g.cell_of(Complex64::new(0.5, 0.5)), Some((1, 1)));
        assert_eq!(g.cell_of(Complex64::new(0.49, 0.0)), Some((0, 0)));
        assert_eq!(g.cell_of(Complex64::new(1.0, 1.0)), Some((1, 1)));
        assert_eq!(g.cell_of(Complex64::new(1.01, 1.0)), None);
    }

    #[test]
    fn parses_cli_form() {
        let g: GridSpec = "-1,1,-1,1,5,5".parse().unwrap();
        assert_eq!(g.step(), 0.5);
        assert!("-1,1,-1,1,5".parse::<GridSpec>().is_err());
        assert!("-1,1,-1,1,5.5,5".parse::<GridSpec>().is_err());
    }
}
