use std::f64::consts::PI;

use crate::error::{domain, Result};

/// Gauss-Hermite nodes and weights for ∫ exp(-x²) f(x) dx, ascending in x.
pub fn gauss_hermite(n: usize) -> Result<Vec<(f64, f64)>> {
    if n == 0 || n > 100 {
        return Err(domain(
            "gauss_hermite",
            format!("node count must be in 1..=100, got {n}"),
        ));
    }
    let mut nodes = vec![(0.0, 0.0); n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0;
    for i in 0..m {
        // standard initial guesses (largest root first), refined by Newton
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[0].0,
            3 => 1.91 * z - 0.91 * nodes[1].0,
            _ => 2.0 * z - nodes[i - 2].0,
        };
        let mut dp = 0.0;
        for _ in 0..100 {
            // orthonormal Hermite recurrence
            let mut p1 = PI.powf(-0.25);
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            dp = (2.0 * nf).sqrt() * p2;
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        let w = 2.0 / (dp * dp);
        nodes[i] = (z, w);
        nodes[n - 1 - i] = (-z, w);
    }
    nodes.reverse();
    if n % 2 == 1 {
        nodes[n / 2].0 = 0.0;
    }
    Ok(nodes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_moments_exactly() {
        for n in [1, 2, 5, 9, 20] {
            let nodes = gauss_hermite(n).unwrap();
            assert!(nodes.windows(2).all(|w| w[0].0 < w[1].0));
            let moment = |p: i32| nodes.iter().map(|(x, w)| w * x.powi(p)).sum::<f64>();
            assert!((moment(0) - PI.sqrt()).abs() < 1e-12, "n = {n}");
            if n >= 2 {
                assert!((moment(2) - PI.sqrt() / 2.0).abs() < 1e-12);
                assert!(moment(1).abs() < 1e-12);
            }
            if n >= 3 {
                assert!((moment(4) - 3.0 * PI.sqrt() / 4.0).abs() < 1e-11);
            }
        }
        assert!(gauss_hermite(0).is_err());
    }

    #[test]
    fn nine_point_largest_node() {
        let nodes = gauss_hermite(9).unwrap();
        assert!((nodes[8].0 - 3.190_993_201_781_528).abs() < 1e-12);
        assert!((nodes[8].1 - 3.960_697_726_326_4e-5).abs() < 1e-15);
    }
}
