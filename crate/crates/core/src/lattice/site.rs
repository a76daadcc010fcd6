use serde::{Deserialize, Serialize};

/// Point of the scaled lattice `(1/m) Z^2`, stored by integer coordinates.
///
/// Ordering is lexicographic in `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site {
    pub x: i32,
    pub y: i32,
}

impl Site {
    pub const fn new(x: i32, y: i32) -> Self {
        Site { x, y }
    }

    /// Physical coordinates at resolution `m`.
    pub fn coords(self, m: u32) -> [f64; 2] {
        let h = 1.0 / m as f64;
        [self.x as f64 * h, self.y as f64 * h]
    }

    /// The four nearest neighbours, in the order +x, -x, +y, -y.
    pub fn neighbors(self) -> [Site; 4] {
        [
            Site::new(self.x + 1, self.y),
            Site::new(self.x - 1, self.y),
            Site::new(self.x, self.y + 1),
            Site::new(self.x, self.y - 1),
        ]
    }

    pub fn norm_sq(self) -> i64 {
        self.x as i64 * self.x as i64 + self.y as i64 * self.y as i64
    }
}

/// Dense rectangular array over lattice sites with a fill value outside.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeGrid<T> {
    x0: i32,
    y0: i32,
    width: usize,
    height: usize,
    fill: T,
    data: Vec<T>,
}

impl<T: Copy> LatticeGrid<T> {
    /// Grid covering `[x0, x1] x [y0, y1]` (inclusive).
    pub fn new(x0: i32, y0: i32, x1: i32, y1: i32, fill: T) -> Self {
        assert!(x1 >= x0 && y1 >= y0, "empty grid extent");
        let width = (x1 - x0 + 1) as usize;
        let height = (y1 - y0 + 1) as usize;
        LatticeGrid { x0, y0, width, height, fill, data: vec![fill; width * height] }
    }

    /// Grid covering the bounding box of `sites` widened by `margin`.
    pub fn around(sites: &[Site], margin: i32, fill: T) -> Self {
        let (mut x0, mut y0, mut x1, mut y1) = (0, 0, 0, 0);
        for (i, s) in sites.iter().enumerate() {
            if i == 0 {
                (x0, y0, x1, y1) = (s.x, s.y, s.x, s.y);
            }
            x0 = x0.min(s.x);
            y0 = y0.min(s.y);
            x1 = x1.max(s.x);
            y1 = y1.max(s.y);
        }
        Self::new(x0 - margin, y0 - margin, x1 + margin, y1 + margin, fill)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Lower-left corner.
    pub fn origin(&self) -> Site {
        Site::new(self.x0, self.y0)
    }

    pub fn index(&self, s: Site) -> Option<usize> {
        let dx = s.x.wrapping_sub(self.x0);
        let dy = s.y.wrapping_sub(self.y0);
        if dx < 0 || dy < 0 || dx as usize >= self.width || dy as usize >= self.height {
            None
        } else {
            Some(dy as usize * self.width + dx as usize)
        }
    }

    pub fn site_of(&self, idx: usize) -> Site {
        Site::new(self.x0 + (idx % self.width) as i32, self.y0 + (idx / self.width) as i32)
    }

    pub fn contains(&self, s: Site) -> bool {
        self.index(s).is_some()
    }

    pub fn get(&self, s: Site) -> T {
        self.index(s).map_or(self.fill, |i| self.data[i])
    }

    /// Writes `v`; returns false when `s` is outside the grid.
    pub fn set(&mut self, s: Site, v: T) -> bool {
        match self.index(s) {
            Some(i) => {
                self.data[i] = v;
                true
            }
            None => false,
        }
    }

    pub fn get_mut(&mut self, s: Site) -> Option<&mut T> {
        self.index(s).map(move |i| &mut self.data[i])
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn fill_value(&self) -> T {
        self.fill
    }

    /// All `(site, value)` pairs in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (Site, T)> + '_ {
        self.data.iter().enumerate().map(move |(i, &v)| (self.site_of(i), v))
    }
}
