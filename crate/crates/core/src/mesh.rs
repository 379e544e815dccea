//! One-dimensional meshes of the interval `[-L, L]`.
//!
//! A mesh is an ordered node array `x_0 = -L < x_1 < ... < x_N = L` with at
//! least three elements. Meshes are immutable once built.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{param, Error, Result};

/// Relative tolerance used when deciding whether a mesh is uniform.
const UNIFORM_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<f64>,
    half_width: f64,
}

impl Mesh {
    /// Builds a mesh from explicit nodes, checking every invariant.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 4 {
            return param(format!("a mesh needs at least 4 nodes, got {}", nodes.len()));
        }
        if let Some(k) = nodes.iter().position(|x| !x.is_finite()) {
            return param(format!("node {k} is not finite"));
        }
        if let Some(k) = nodes.windows(2).position(|w| w[1] <= w[0]) {
            return param(format!("nodes are not strictly increasing at index {}", k + 1));
        }
        let half_width = *nodes.last().unwrap();
        if half_width <= 0.0 || nodes[0] != -half_width {
            return param(format!(
                "mesh must span a symmetric interval [-L, L], got [{}, {}]",
                nodes[0], half_width
            ));
        }
        Ok(Mesh { nodes, half_width })
    }

    /// Uniform mesh with `n` elements of length `2L/n`.
    pub fn uniform(half_width: f64, n: usize) -> Result<Self> {
        check_domain(half_width, n)?;
        let h = 2.0 * half_width / n as f64;
        let mut nodes: Vec<f64> = (0..=n).map(|k| -half_width + k as f64 * h).collect();
        nodes[n] = half_width;
        Mesh::from_nodes(nodes)
    }

    /// Two-density mesh: `ceil(fraction * n)` equal elements inside `focus`,
    /// the rest split over the two outer pieces in proportion to their length.
    pub fn graded(half_width: f64, n: usize, focus: (f64, f64), fraction: f64) -> Result<Self> {
        check_domain(half_width, n)?;
        let (a, b) = focus;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return param(format!("focus interval ({a}, {b}) is empty"));
        }
        if a <= -half_width || b >= half_width {
            return param(format!(
                "focus interval ({a}, {b}) must lie strictly inside (-{half_width}, {half_width})"
            ));
        }
        if !(fraction > 0.0 && fraction < 1.0) {
            return param(format!("fraction must lie in (0, 1), got {fraction}"));
        }
        let nf = n as f64;
        if fraction * nf < 2.0 || (1.0 - fraction) * nf < 2.0 {
            return param(format!(
                "fraction {fraction} leaves fewer than 2 elements on one side for N = {n}"
            ));
        }
        let inner = ((fraction * nf).ceil() as usize).min(n - 2);
        let outer = n - inner;
        let left_len = a + half_width;
        let right_len = half_width - b;
        let left = ((outer as f64 * left_len / (left_len + right_len)).round() as usize)
            .clamp(1, outer - 1);
        let right = outer - left;

        let mut nodes = Vec::with_capacity(n + 1);
        push_segment(&mut nodes, -half_width, a, left);
        push_segment(&mut nodes, a, b, inner);
        push_segment(&mut nodes, b, half_width, right);
        nodes.push(half_width);
        Mesh::from_nodes(nodes)
    }

    /// Reads a mesh file: one decimal coordinate per line, strictly ascending.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let format_err = |line: usize, message: String| Error::Format {
            path: path.to_path_buf(),
            line,
            message,
        };

        let mut nodes: Vec<f64> = Vec::new();
        let mut last_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            let x: f64 = trimmed
                .parse()
                .map_err(|e| format_err(line, format!("cannot parse {trimmed:?}: {e}")))?;
            if !x.is_finite() {
                return Err(format_err(line, format!("non-finite coordinate {trimmed:?}")));
            }
            if let Some(&prev) = nodes.last() {
                if x <= prev {
                    return Err(format_err(
                        line,
                        format!("coordinate {x} does not exceed previous {prev}"),
                    ));
                }
            }
            nodes.push(x);
            last_line = line;
        }
        if nodes.len() < 4 {
            return Err(format_err(
                last_line.max(1),
                format!("need at least 4 nodes, found {}", nodes.len()),
            ));
        }
        let (first, last) = (nodes[0], nodes[nodes.len() - 1]);
        if last <= 0.0 || first != -last {
            return Err(format_err(
                last_line,
                format!("mesh must span [-L, L], got [{first}, {last}]"),
            ));
        }
        Mesh::from_nodes(nodes).map_err(|e| format_err(last_line, e.to_string()))
    }

    /// Mesh file contents. `{}` formatting of `f64` is round-trip exact.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.nodes.len() * 24);
        for x in &self.nodes {
            writeln!(out, "{x}").unwrap();
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Number of elements `N`.
    pub fn elements(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Length of element `k`, i.e. `x_{k+1} - x_k`.
    pub fn element_length(&self, k: usize) -> f64 {
        self.nodes[k + 1] - self.nodes[k]
    }

    pub fn element_lengths(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.windows(2).map(|w| w[1] - w[0])
    }

    /// Common spacing if all elements have the same length.
    pub fn uniform_spacing(&self) -> Option<f64> {
        let h = 2.0 * self.half_width / self.elements() as f64;
        self.element_lengths()
            .all(|hk| (hk - h).abs() <= UNIFORM_RTOL * h)
            .then_some(h)
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform_spacing().is_some()
    }
}

fn check_domain(half_width: f64, n: usize) -> Result<()> {
    if !(half_width.is_finite() && half_width > 0.0) {
        return param(format!("half-width L must be positive, got {half_width}"));
    }
    if n < 3 {
        return param(format!("need at least 3 elements, got {n}"));
    }
    Ok(())
}

/// Pushes `count` nodes `from, from + h, ...` (excluding `to`).
fn push_segment(nodes: &mut Vec<f64>, from: f64, to: f64, count: usize) {
    let h = (to - from) / count as f64;
    nodes.extend((0..count).map(|k| from + k as f64 * h));
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uniform_nodes() {
        let m = Mesh::uniform(1.0, 4).unwrap();
        assert_eq!(m.nodes(), &[-1.0, -0.5, 0.0, 0.5, 1.0]);
        let m = Mesh::uniform(6.0, 3).unwrap();
        assert_eq!(m.nodes(), &[-6.0, -2.0, 2.0, 6.0]);
    }

    #[test]
    fn uniform_reference_grid() {
        let m = Mesh::uniform(6.0, 200).unwrap();
        assert_eq!(m.nodes().len(), 201);
        for h in m.element_lengths() {
            assert!((h - 0.06).abs() < 1e-13);
        }
        assert_eq!(m.uniform_spacing().map(|h| (h - 0.06).abs() < 1e-15), Some(true));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Mesh::uniform(0.0, 10).is_err());
        assert!(Mesh::uniform(-1.0, 10).is_err());
        assert!(Mesh::uniform(1.0, 2).is_err());
        assert!(Mesh::uniform(f64::NAN, 10).is_err());
    }

    fn count_inside(m: &Mesh, a: f64, b: f64) -> usize {
        m.nodes()
            .windows(2)
            .filter(|w| w[0] >= a - 1e-12 && w[1] <= b + 1e-12)
            .count()
    }

    #[test]
    fn graded_counts() {
        let m = Mesh::graded(6.0, 200, (0.0, 3.0), 0.75).unwrap();
        assert_eq!(m.elements(), 200);
        assert_eq!(count_inside(&m, 0.0, 3.0), 150);
        assert!(!m.is_uniform());

        let m = Mesh::graded(6.0, 4, (0.0, 3.0), 0.5).unwrap();
        assert_eq!(m.elements(), 4);
        assert_eq!(count_inside(&m, 0.0, 3.0), 2);
    }

    #[test]
    fn graded_rejects_full_domain_focus() {
        assert!(Mesh::graded(6.0, 200, (-6.0, 6.0), 0.75).is_err());
        assert!(Mesh::graded(6.0, 200, (3.0, 0.0), 0.75).is_err());
        assert!(Mesh::graded(6.0, 200, (0.0, 3.0), 0.999).is_err());
    }

    #[test]
    fn graded_is_denser_in_focus() {
        let m = Mesh::graded(6.0, 200, (0.0, 3.0), 0.75).unwrap();
        let (mut inside, mut outside) = (f64::MAX, 0.0f64);
        for w in m.nodes().windows(2) {
            let h = w[1] - w[0];
            if w[0] >= 0.0 && w[1] <= 3.0 + 1e-12 {
                inside = inside.min(h);
            } else {
                outside = outside.max(h);
            }
        }
        assert!(inside < outside / 5.0);
    }

    #[test]
    fn load_and_reject() {
        let dir = std::env::temp_dir().join(format!("hs-mesh-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();

        let good = dir.join("good.txt");
        fs::write(&good, "-1\n0\n0.5\n1\n").unwrap();
        let m = Mesh::load(&good).unwrap();
        assert_eq!(m.nodes(), &[-1.0, 0.0, 0.5, 1.0]);
        assert_eq!(m.half_width(), 1.0);

        let bad = dir.join("bad.txt");
        fs::write(&bad, "-1\n0.5\n0\n1\n").unwrap();
        match Mesh::load(&bad) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected format error, got {other:?}"),
        }

        let short = dir.join("short.txt");
        fs::write(&short, "-1\n0\n1\n").unwrap();
        assert!(matches!(Mesh::load(&short), Err(Error::Format { .. })));

        let junk = dir.join("junk.txt");
        fs::write(&junk, "-1\n0\nabc\n1\n").unwrap();
        match Mesh::load(&junk) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected format error, got {other:?}"),
        }

        let uniform = Mesh::uniform(6.0, 200).unwrap();
        let path = dir.join("uniform.txt");
        uniform.write(&path).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 201);
        assert_eq!(Mesh::load(&path).unwrap(), uniform);

        assert!(matches!(Mesh::load(dir.join("missing.txt")), Err(Error::Io { .. })));
        fs::remove_dir_all(&dir).ok();
    }

    proptest! {
        #[test]
        fn lengths_sum_to_domain(l in 0.1f64..100.0, n in 3usize..500) {
            let m = Mesh::uniform(l, n).unwrap();
            let total: f64 = m.element_lengths().sum();
            prop_assert!((total - 2.0 * l).abs() <= 1e-12 * 2.0 * l);
        }

        #[test]
        fn graded_lengths_sum_to_domain(
            l in 2.0f64..20.0,
            n in 8usize..400,
            a in -0.9f64..0.0,
            w in 0.1f64..0.9,
            fraction in 0.3f64..0.7,
        ) {
            let (fa, fb) = (a * l, a * l + w * l);
            let m = Mesh::graded(l, n, (fa, fb), fraction).unwrap();
            prop_assert_eq!(m.elements(), n);
            let total: f64 = m.element_lengths().sum();
            prop_assert!((total - 2.0 * l).abs() <= 1e-12 * 2.0 * l);
        }

        #[test]
        fn text_round_trip(l in 0.5f64..50.0, n in 3usize..300) {
            let m = Mesh::uniform(l, n).unwrap();
            let dir = std::env::temp_dir();
            let path = dir.join(format!("hs-rt-{}-{n}.txt", std::process::id()));
            m.write(&path).unwrap();
            let back = Mesh::load(&path).unwrap();
            fs::remove_file(&path).ok();
            prop_assert_eq!(back, m);
        }
    }
}
