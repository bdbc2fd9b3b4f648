use crate::bits::VertexSet;
use crate::error::{Error, Result};
use crate::hypercore::bipartite::check_pair;
use crate::hypercore::{BipartiteDensity, TripartiteDensity};

fn check_weight(w: f64, at: &[usize]) -> Result<()> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::InvalidParameter(format!(
            "weight {w} at {at:?} is outside [0, 1]"
        )));
    }
    Ok(())
}

/// Dense weighted bipartite graph with weights in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedBipartite {
    n_x: usize,
    n_y: usize,
    weights: Vec<f64>,
}

impl WeightedBipartite {
    pub fn from_fn(n_x: usize, n_y: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut weights = Vec::with_capacity(n_x * n_y);
        for x in 0..n_x {
            for y in 0..n_y {
                let w = f(x, y);
                check_weight(w, &[x, y])?;
                weights.push(w);
            }
        }
        Ok(Self { n_x, n_y, weights })
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    #[inline]
    pub fn weight(&self, x: usize, y: usize) -> f64 {
        self.weights[x * self.n_y + y]
    }

    /// Weighted density, summed in index order.
    pub fn density(&self, xs: &VertexSet, ys: &VertexSet) -> Result<f64> {
        check_pair(self.n_x, self.n_y, xs, ys)?;
        let ys: Vec<usize> = ys.to_vec();
        let mut sum = 0.0;
        for x in xs.iter() {
            let row = &self.weights[x * self.n_y..(x + 1) * self.n_y];
            for &y in &ys {
                sum += row[y];
            }
        }
        Ok(sum / (xs.count() as f64 * ys.len() as f64))
    }
}

impl BipartiteDensity for WeightedBipartite {
    fn shape(&self) -> (usize, usize) {
        (self.n_x, self.n_y)
    }

    fn weight(&self, x: usize, y: usize) -> f64 {
        WeightedBipartite::weight(self, x, y)
    }

    fn box_density(&self, xs: &VertexSet, ys: &VertexSet) -> Result<f64> {
        self.density(xs, ys)
    }
}

/// Dense weighted 3-partite 3-graph on `A × B × C`, stored `a`-major.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedTripartite {
    sizes: [usize; 3],
    weights: Vec<f64>,
}

impl WeightedTripartite {
    pub fn zeros(sizes: [usize; 3]) -> Self {
        Self {
            sizes,
            weights: vec![0.0; sizes[0] * sizes[1] * sizes[2]],
        }
    }

    pub fn from_fn(sizes: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> f64) -> Result<Self> {
        let mut weights = Vec::with_capacity(sizes[0] * sizes[1] * sizes[2]);
        for a in 0..sizes[0] {
            for b in 0..sizes[1] {
                for c in 0..sizes[2] {
                    let w = f(a, b, c);
                    check_weight(w, &[a, b, c])?;
                    weights.push(w);
                }
            }
        }
        Ok(Self { sizes, weights })
    }

    pub fn sizes(&self) -> [usize; 3] {
        self.sizes
    }

    #[inline]
    pub fn index(&self, a: usize, b: usize, c: usize) -> usize {
        (a * self.sizes[1] + b) * self.sizes[2] + c
    }

    #[inline]
    pub fn weight(&self, a: usize, b: usize, c: usize) -> f64 {
        self.weights[self.index(a, b, c)]
    }

    pub fn set(&mut self, a: usize, b: usize, c: usize, w: f64) -> Result<()> {
        for (part, (&i, &n)) in [a, b, c].iter().zip(&self.sizes).enumerate() {
            if i >= n {
                return Err(Error::OutOfRange { part, index: i, size: n });
            }
        }
        check_weight(w, &[a, b, c])?;
        let i = self.index(a, b, c);
        self.weights[i] = w;
        Ok(())
    }

    /// Raw weights in `(a, b, c)` row-major order.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn full_sets(&self) -> [VertexSet; 3] {
        [
            VertexSet::full(0, self.sizes[0]),
            VertexSet::full(1, self.sizes[1]),
            VertexSet::full(2, self.sizes[2]),
        ]
    }

    /// Sum of weights over the sub-box, accumulated in index order.
    pub fn box_sum(&self, sets: [&VertexSet; 3]) -> Result<f64> {
        for (part, s) in sets.iter().enumerate() {
            if s.universe() != self.sizes[part] {
                return Err(Error::Mismatch(format!(
                    "subset for part {part} has universe {}, part has {}",
                    s.universe(),
                    self.sizes[part]
                )));
            }
            if s.is_empty() {
                return Err(Error::EmptySubset { part });
            }
        }
        let bs = sets[1].to_vec();
        let cs = sets[2].to_vec();
        let mut sum = 0.0;
        for a in sets[0].iter() {
            for &b in &bs {
                let base = (a * self.sizes[1] + b) * self.sizes[2];
                let row = &self.weights[base..base + self.sizes[2]];
                for &c in &cs {
                    sum += row[c];
                }
            }
        }
        Ok(sum)
    }

    pub fn density(&self, sets: [&VertexSet; 3]) -> Result<f64> {
        let sum = self.box_sum(sets)?;
        let cells = sets.iter().map(|s| s.count() as f64).product::<f64>();
        Ok(sum / cells)
    }

    /// Link of one vertex: the weighted bipartite graph on the other two
    /// parts, lower part index on the left.
    pub fn link(&self, part: usize, v: usize) -> Result<WeightedBipartite> {
        if part >= 3 {
            return Err(Error::InvalidParameter(format!("no part {part}")));
        }
        if v >= self.sizes[part] {
            return Err(Error::OutOfRange { part, index: v, size: self.sizes[part] });
        }
        let [na, nb, nc] = self.sizes;
        match part {
            0 => WeightedBipartite::from_fn(nb, nc, |b, c| self.weight(v, b, c)),
            1 => WeightedBipartite::from_fn(na, nc, |a, c| self.weight(a, v, c)),
            _ => WeightedBipartite::from_fn(na, nb, |a, b| self.weight(a, b, v)),
        }
    }

    pub fn support_count(&self) -> usize {
        self.weights.iter().filter(|&&w| w != 0.0).count()
    }
}

impl TripartiteDensity for WeightedTripartite {
    fn shape(&self) -> [usize; 3] {
        self.sizes
    }

    fn weight(&self, a: usize, b: usize, c: usize) -> f64 {
        WeightedTripartite::weight(self, a, b, c)
    }

    fn box_density(&self, sets: [&VertexSet; 3]) -> Result<f64> {
        self.density(sets)
    }
}
