//! Kernel checks against independent oracles: a dense Jacobi eigensolver for
//! the power-iteration path, reconstruction residuals for Cholesky and the
//! triangular inverse, and property tests for the norm identities.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use uavsec_core::linalg::{dot_conj, C64, ComplexMatrix};

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let data = (0..rows * cols)
        .map(|_| {
            C64::new(
                StandardNormal.sample(rng),
                StandardNormal.sample(rng),
            )
        })
        .collect();
    ComplexMatrix::new(rows, cols, data).unwrap()
}

fn random_hpd(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let a = random_matrix(rng, n, n);
    a.adjoint().mul(&a).add(&ComplexMatrix::identity(n))
}

/// Full Hermitian eigendecomposition by cyclic Jacobi rotations — an
/// implementation independent of the library's power-iteration route.
fn jacobi_eig(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = m.rows();
    let mut a = m.clone();
    let mut v = ComplexMatrix::identity(n);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a.at(p, q).norm_sqr();
            }
        }
        if off.sqrt() <= 1e-14 * (1.0 + a.fro_norm()) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.at(p, q);
                if apq.norm() <= 1e-300 {
                    continue;
                }
                let app = a.at(p, p).re;
                let aqq = a.at(q, q).re;
                // Phase that makes the off-diagonal real, then a real
                // rotation that zeroes it.
                let phase = apq / apq.norm();
                let theta = 0.5 * (2.0 * apq.norm()).atan2(app - aqq);
                let c = theta.cos();
                let s = theta.sin();
                // Columns p and q of the rotation: [c, -s*phase; s*conj(phase), c]
                let mut rot = ComplexMatrix::identity(n);
                rot.set(p, p, C64::new(c, 0.0));
                rot.set(p, q, phase * (-s));
                rot.set(q, p, phase.conj() * s);
                rot.set(q, q, C64::new(c, 0.0));
                a = rot.adjoint().mul(&a).mul(&rot);
                v = v.mul(&rot);
            }
        }
    }
    let values: Vec<f64> = (0..n).map(|i| a.at(i, i).re).collect();
    (values, v)
}

#[test]
fn jacobi_oracle_diagonalizes() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let m = random_hpd(&mut rng, 4);
    let (vals, vecs) = jacobi_eig(&m);
    // Reconstruct sum lambda_i v_i v_i^H.
    let mut recon = ComplexMatrix::zeros(4, 4);
    for i in 0..4 {
        recon = recon.add(&ComplexMatrix::outer(&vecs.col(i)).scale(vals[i]));
    }
    let rel = recon.sub(&m).fro_norm() / m.fro_norm();
    assert!(rel <= 1e-12, "oracle reconstruction {rel:.3e}");
}

#[test]
fn dominant_eigvecs_match_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for trial in 0..100 {
        let a = random_matrix(&mut rng, 4, 4);
        let m = a.adjoint().mul(&a);
        let eig = m.dominant_eigvecs(2).unwrap();
        let (mut ovals, ovecs) = jacobi_eig(&m);
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&x, &y| ovals[y].partial_cmp(&ovals[x]).unwrap());
        ovals.sort_by(|x, y| y.partial_cmp(x).unwrap());

        for j in 0..2 {
            assert!(
                (eig.values[j] - ovals[j]).abs() <= 1e-8 * (1.0 + ovals[0]),
                "trial {trial}: eigenvalue {j} {:.12e} vs oracle {:.12e}",
                eig.values[j],
                ovals[j]
            );
        }
        // Subspace agreement via principal angles of the 2x2 overlap matrix.
        let mut overlap = [[C64::new(0.0, 0.0); 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                overlap[r][c] = dot_conj(&eig.vectors.col(r), &ovecs.col(order[c]));
            }
        }
        // Smallest singular value of the overlap: sigma_min^2 is the lesser
        // eigenvalue of O^H O.
        let g00 = overlap[0][0].norm_sqr() + overlap[1][0].norm_sqr();
        let g11 = overlap[0][1].norm_sqr() + overlap[1][1].norm_sqr();
        let g01 = overlap[0][0].conj() * overlap[0][1] + overlap[1][0].conj() * overlap[1][1];
        let mean = 0.5 * (g00 + g11);
        let disc = (0.25 * (g00 - g11) * (g00 - g11) + g01.norm_sqr()).sqrt();
        let sigma_min_sq = (mean - disc).max(0.0);
        let angle = sigma_min_sq.sqrt().min(1.0).acos();
        assert!(
            angle <= 1e-6,
            "trial {trial}: subspace angle {angle:.3e} exceeds 1e-6"
        );
    }
}

#[test]
fn cholesky_reconstruction_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for trial in 0..200 {
        let n = 2 + (trial % 7);
        let m = random_hpd(&mut rng, n);
        let c = m.cholesky().unwrap();
        let rel = c.mul(&c.adjoint()).sub(&m).fro_norm() / m.fro_norm();
        assert!(rel <= 1e-10, "trial {trial}: residual {rel:.3e}");
    }
}

#[test]
fn triangular_inverse_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(56);
    for trial in 0..200 {
        let n = 2 + (trial % 7);
        let m = random_hpd(&mut rng, n);
        let c = m.cholesky().unwrap();
        let inv = c.inv_lower_triangular().unwrap();
        let resid = c.mul(&inv).sub(&ComplexMatrix::identity(n)).fro_norm();
        assert!(resid <= 1e-10, "trial {trial}: residual {resid:.3e}");
    }
}

proptest! {
    #[test]
    fn fro_norm_sq_equals_gram_trace(entries in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 6)) {
        let m = ComplexMatrix::from_parts(2, 3, &entries).unwrap();
        let lhs = m.fro_norm_sq();
        let rhs = m.adjoint().mul(&m).trace().re;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1.0));
    }

    #[test]
    fn steering_vectors_have_unit_modulus_entries(cos_angle in -1.0f64..1.0, n in 1usize..9) {
        let a = uavsec_core::scenario::steering_vector(n, 0.5, cos_angle);
        let energy: f64 = a.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((energy - n as f64).abs() < 1e-9);
    }
}
