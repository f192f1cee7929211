//! Geometry invariants: metric consistency, exp/log round trips, geodesic
//! speed conservation, chart re-centering isometry and divergence oracles.

use approx::{assert_abs_diff_eq, assert_relative_eq};
use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use scoremeans::manifold::{
    self, divergence, Landmarks, Manifold, ManifoldId, Point, Sphere, Sym, TangentVector,
};

fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

fn all_ids() -> Vec<ManifoldId> {
    vec![
        ManifoldId::Euclidean(2),
        ManifoldId::Euclidean(3),
        ManifoldId::Sphere(1),
        ManifoldId::Sphere(2),
        ManifoldId::Sphere(3),
        ManifoldId::Sym(2),
        ManifoldId::Spd(2),
        ManifoldId::Landmarks { points: 2, ambient: 2 },
        ManifoldId::Landmarks { points: 3, ambient: 1 },
    ]
}

/// Random point in a region where every family's chart is healthy.
fn random_point(id: ManifoldId, r: &mut ChaCha12Rng) -> Point<f64> {
    let d = id.dim();
    match id {
        ManifoldId::Sphere(n) => {
            let dir = DVector::from_fn(n + 1, |_, _| r.gen_range(-1.0..1.0)).normalize();
            Point::with_anchor(DVector::from_fn(n, |_, _| r.gen_range(-0.6..0.6)), dir)
        }
        ManifoldId::Spd(n) => {
            // Keep the Cholesky-style factor away from singularity.
            let spd = manifold::Spd::new(n);
            let mut coords = spd.identity_coords::<f64>();
            for i in 0..d {
                coords[i] += r.gen_range(-0.3..0.3);
            }
            Point::new(coords)
        }
        ManifoldId::Landmarks { points, ambient } => {
            // Separated landmarks on a jittered grid.
            let mut coords = DVector::zeros(d);
            for i in 0..points {
                for c in 0..ambient {
                    coords[i * ambient + c] =
                        3.0 * i as f64 + r.gen_range(-0.8..0.8) + 0.1 * c as f64;
                }
            }
            Point::new(coords)
        }
        _ => Point::new(DVector::from_fn(d, |_, _| r.gen_range(-1.0..1.0))),
    }
}

#[test]
fn metric_examples() {
    // Flat space: identity metric, vanishing Christoffels.
    let r2 = manifold::make::<f64>(ManifoldId::Euclidean(2));
    let x = Point::from_slice(&[0.3, -0.7]);
    let md = r2.metric_at(&x).unwrap();
    assert_relative_eq!(md.g, nalgebra::DMatrix::identity(2, 2), epsilon = 1e-15);
    for k in 0..2 {
        assert_abs_diff_eq!(md.christoffel[k].norm(), 0.0, epsilon = 1e-15);
    }

    // Stereographic chart center: g = 4 I.
    let s2 = manifold::make::<f64>(ManifoldId::Sphere(2));
    let north = Sphere::new(2).north_point::<f64>();
    let md = s2.metric_at(&north).unwrap();
    assert_relative_eq!(md.g, nalgebra::DMatrix::identity(2, 2) * 4.0, epsilon = 1e-12);

    // Sym(2): constant diag(1, 2, 1) for coordinate order (00, 01, 11).
    let sym2 = manifold::make::<f64>(ManifoldId::Sym(2));
    let x = Point::from_slice(&[1.0, 0.2, -0.4]);
    let md = sym2.metric_at(&x).unwrap();
    let expected = nalgebra::DMatrix::from_diagonal(&DVector::from_column_slice(&[1.0, 2.0, 1.0]));
    assert_relative_eq!(md.g, expected, epsilon = 1e-15);
    for k in 0..3 {
        assert_abs_diff_eq!(md.christoffel[k].norm(), 0.0, epsilon = 1e-12);
    }

    // Distant landmarks: kernel matrix ~ I, so g ~ I.
    let lm = manifold::make::<f64>(ManifoldId::Landmarks { points: 2, ambient: 1 });
    let x = Point::from_slice(&[0.0, 10.0]);
    let md = lm.metric_at(&x).unwrap();
    assert_relative_eq!(md.g, nalgebra::DMatrix::identity(2, 2), epsilon = 1e-12);
}

#[test]
fn coincident_landmarks_rejected() {
    let lm = manifold::make::<f64>(ManifoldId::Landmarks { points: 2, ambient: 2 });
    let x = Point::from_slice(&[1.0, 2.0, 1.0, 2.0]);
    assert!(matches!(
        lm.metric_at(&x),
        Err(scoremeans::Error::DegenerateMetric(_))
    ));
}

#[test]
fn metric_consistency_invariant() {
    // g g^{-1} = I within 1e-8 and g SPD on 100 random points per family.
    for id in all_ids() {
        let m = manifold::make::<f64>(id);
        let mut r = rng(101);
        for _ in 0..100 {
            let x = random_point(id, &mut r);
            let md = m.metric_at(&x).unwrap();
            let d = id.dim();
            let prod = &md.g * &md.g_inv;
            assert!(
                (prod - nalgebra::DMatrix::<f64>::identity(d, d)).norm() < 1e-8,
                "g g_inv != I on {id}"
            );
            // metric_at already requires a Cholesky factorization, which
            // certifies positive definiteness; also check the factor of
            // the inverse reproduces it.
            let s = &md.sqrt_g_inv * md.sqrt_g_inv.transpose();
            assert!((s - &md.g_inv).norm() < 1e-8 * (1.0 + md.g_inv.norm()));
        }
    }
}

#[test]
fn christoffel_symmetry_and_fd_agreement() {
    for id in all_ids() {
        let m = manifold::make::<f64>(id);
        let mut r = rng(7);
        for _ in 0..10 {
            let x = random_point(id, &mut r);
            let d = id.dim();
            let exact = m.christoffel(&x).unwrap();
            for k in 0..d {
                assert_eq!(exact[k], exact[k].transpose(), "Gamma^{k} not symmetric on {id}");
            }
            // Finite-difference route: bypass the closed-form derivatives.
            let g_at = |p: &Point<f64>| m.metric(p).unwrap();
            let mut fd_gamma = vec![nalgebra::DMatrix::<f64>::zeros(d, d); d];
            let g_inv = m.metric_at(&x).unwrap().g_inv;
            let h = 1e-5;
            let dg: Vec<nalgebra::DMatrix<f64>> = (0..d)
                .map(|l| {
                    let mut xp = x.clone();
                    xp.coords[l] += h;
                    let mut xm = x.clone();
                    xm.coords[l] -= h;
                    (g_at(&xp) - g_at(&xm)) / (2.0 * h)
                })
                .collect();
            for k in 0..d {
                for i in 0..d {
                    for j in 0..d {
                        let mut acc = 0.0;
                        for l in 0..d {
                            acc += g_inv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                        }
                        fd_gamma[k][(i, j)] = 0.5 * acc;
                    }
                }
            }
            for k in 0..d {
                assert!(
                    (&exact[k] - &fd_gamma[k]).norm() < 1e-4 * (1.0 + exact[k].norm()),
                    "finite-difference Christoffels disagree on {id}"
                );
            }
        }
    }
}

#[test]
fn sphere_christoffels_match_conformal_formula() {
    // For g_ij = lambda(u) delta_ij with lambda = 4 / (1 + |u|^2)^2:
    // Gamma^k_ij = (d_i log lambda delta_jk + d_j log lambda delta_ik
    //               - d_k log lambda delta_ij) / 2.
    let s2 = manifold::make::<f64>(ManifoldId::Sphere(2));
    let mut r = rng(42);
    for _ in 0..20 {
        let u = [r.gen_range(-0.8..0.8), r.gen_range(-0.8..0.8)];
        let x = Point::with_anchor(
            DVector::from_column_slice(&u),
            DVector::from_column_slice(&[0.0, 0.0, 1.0]),
        );
        let gamma = s2.christoffel(&x).unwrap();
        let s: f64 = u.iter().map(|v| v * v).sum();
        let phi: Vec<f64> = u.iter().map(|v| -4.0 * v / (1.0 + s)).collect();
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let mut expect = 0.0;
                    if j == k {
                        expect += phi[i];
                    }
                    if i == k {
                        expect += phi[j];
                    }
                    if i == j {
                        expect -= phi[k];
                    }
                    expect *= 0.5;
                    assert_abs_diff_eq!(gamma[k][(i, j)], expect, epsilon = 1e-10);
                }
            }
        }
    }
}

#[test]
fn sphere_exp_examples() {
    let s2 = Sphere::new(2);
    let north = s2.north_point::<f64>();

    // Antipodal geodesic: |v| = pi lands on the south pole.
    let md = Manifold::<f64>::metric_at(&s2, &north).unwrap();
    // Chart components scale: |v|_g = 2 |components| at the center.
    let comp = DVector::from_column_slice(&[std::f64::consts::PI / 2.0, 0.0]);
    let v = TangentVector::new(north.clone(), comp);
    assert_abs_diff_eq!(
        Manifold::<f64>::norm(&s2, &v).unwrap(),
        std::f64::consts::PI,
        epsilon = 1e-12
    );
    let south = Manifold::<f64>::exp(&s2, &v).unwrap();
    let emb = Manifold::<f64>::embed(&s2, &south).unwrap();
    assert_relative_eq!(
        emb,
        DVector::from_column_slice(&[0.0, 0.0, -1.0]),
        epsilon = 1e-10
    );
    drop(md);

    // Quarter great circle along the first tangent axis reaches (1, 0, 0).
    let comp = DVector::from_column_slice(&[std::f64::consts::PI / 4.0, 0.0]);
    let v = TangentVector::new(north.clone(), comp);
    let q = Manifold::<f64>::exp(&s2, &v).unwrap();
    let emb = Manifold::<f64>::embed(&s2, &q).unwrap();
    assert_relative_eq!(emb, DVector::from_column_slice(&[1.0, 0.0, 0.0]), epsilon = 1e-10);

    // Log back: tangent of norm pi/2 toward (1, 0, 0).
    let l = Manifold::<f64>::log(&s2, &north, &q).unwrap();
    assert_abs_diff_eq!(
        Manifold::<f64>::norm(&s2, &l).unwrap(),
        std::f64::consts::PI / 2.0,
        epsilon = 1e-10
    );
    assert_abs_diff_eq!(
        Manifold::<f64>::distance(&s2, &north, &q).unwrap(),
        std::f64::consts::PI / 2.0,
        epsilon = 1e-12
    );

    // Antipodal log and distance hit the cut locus.
    assert!(matches!(
        Manifold::<f64>::log(&s2, &north, &south),
        Err(scoremeans::Error::CutLocus(_))
    ));
    assert!(matches!(
        Manifold::<f64>::distance(&s2, &north, &south),
        Err(scoremeans::Error::CutLocus(_))
    ));
}

#[test]
fn flat_exp_log_examples() {
    let r3 = manifold::make::<f64>(ManifoldId::Euclidean(3));
    let x = Point::from_slice(&[1.0, 1.0, 1.0]);
    let y = Point::from_slice(&[2.0, 0.0, 1.0]);
    let l = r3.log(&x, &y).unwrap();
    assert_relative_eq!(
        l.components,
        DVector::from_column_slice(&[1.0, -1.0, 0.0]),
        epsilon = 1e-15
    );
    assert_abs_diff_eq!(r3.distance(&x, &y).unwrap(), 2.0f64.sqrt(), epsilon = 1e-15);

    let r2 = manifold::make::<f64>(ManifoldId::Euclidean(2));
    let e = r2
        .exp(&TangentVector::new(
            Point::from_slice(&[0.0, 0.0]),
            DVector::from_column_slice(&[1.0, 2.0]),
        ))
        .unwrap();
    assert_relative_eq!(e.coords, DVector::from_column_slice(&[1.0, 2.0]), epsilon = 1e-15);

    // Sym: chart difference; zero vector at y = x.
    let sym2 = manifold::make::<f64>(ManifoldId::Sym(2));
    let x = Point::from_slice(&[1.0, 0.0, 1.0]);
    let l = sym2.log(&x, &x).unwrap();
    assert_abs_diff_eq!(l.components.norm(), 0.0, epsilon = 1e-15);
}

#[test]
fn exp_log_round_trip() {
    // log(x, exp_x(v)) = v within 1e-6 for |v| <= 0.5.
    for id in [ManifoldId::Euclidean(3), ManifoldId::Sphere(2), ManifoldId::Sphere(3), ManifoldId::Sym(2)] {
        let m = manifold::make::<f64>(id);
        let mut r = rng(9);
        for _ in 0..50 {
            let x = random_point(id, &mut r);
            let d = id.dim();
            let raw = DVector::from_fn(d, |_, _| r.gen_range(-1.0..1.0));
            let v = TangentVector::new(x.clone(), raw);
            let norm = m.norm(&v).unwrap();
            let target: f64 = r.gen_range(0.05..0.5);
            let v = TangentVector::new(x.clone(), v.components * (target / norm));
            let y = m.exp(&v).unwrap();
            let back = m.log(&x, &y).unwrap();
            assert!(
                (back.components - &v.components).norm() < 1e-6,
                "round trip failed on {id}"
            );
        }
    }
}

#[test]
fn geodesic_speed_is_conserved_by_rk4() {
    // <v, v>_gamma constant within 1e-6 relative drift over unit time.
    for id in [ManifoldId::Sphere(2), ManifoldId::Spd(2), ManifoldId::Landmarks { points: 2, ambient: 2 }] {
        let m = manifold::make::<f64>(id);
        let mut r = rng(33);
        for _ in 0..5 {
            let x = random_point(id, &mut r);
            let d = id.dim();
            let raw = DVector::from_fn(d, |_, _| r.gen_range(-0.5..0.5));
            let v = TangentVector::new(x.clone(), raw);
            let norm = m.norm(&v).unwrap();
            let v = TangentVector::new(x.clone(), v.components * (0.4 / norm));
            let traj = m.geodesic_trajectory(&v, 100).unwrap();
            let speed0 = 0.16;
            for (u, w) in traj.iter() {
                let p = Point {
                    coords: u.clone(),
                    anchor: x.anchor.clone(),
                };
                let g = m.metric(&p).unwrap();
                let speed = (w.transpose() * g * w)[(0, 0)];
                assert!(
                    (speed - speed0).abs() < 1e-6 * speed0,
                    "speed drift on {id}: {speed} vs {speed0}"
                );
            }
        }
    }
}

#[test]
fn sphere_closed_form_exp_matches_rk4() {
    let s2 = manifold::make::<f64>(ManifoldId::Sphere(2));
    let mut r = rng(55);
    for _ in 0..10 {
        let x = random_point(ManifoldId::Sphere(2), &mut r);
        let raw = DVector::from_fn(2, |_, _| r.gen_range(-0.4..0.4));
        let v = TangentVector::new(x.clone(), raw);
        let closed = s2.exp(&v).unwrap();
        let rk4 = s2.exp_rk4(&v, 100).unwrap();
        let e1 = s2.embed(&closed).unwrap();
        let e2 = s2.embed(&rk4).unwrap();
        assert!((e1 - e2).norm() < 1e-8);
    }
}

#[test]
fn recenter_is_isometric_and_idempotent_at_center() {
    let s2 = manifold::make::<f64>(ManifoldId::Sphere(2));
    let mut r = rng(77);
    for _ in 0..50 {
        let x = random_point(ManifoldId::Sphere(2), &mut r);
        let y = random_point(ManifoldId::Sphere(2), &mut r);
        let d0 = s2.distance(&x, &y).unwrap();
        let xr = s2.recenter(&x);
        assert_abs_diff_eq!(xr.coords.norm(), 0.0, epsilon = 1e-15);
        let d1 = s2.distance(&xr, &y).unwrap();
        assert_abs_diff_eq!(d0, d1, epsilon = 1e-10);
        // The embedded representative is unchanged.
        let e0 = s2.embed(&x).unwrap();
        let e1 = s2.embed(&xr).unwrap();
        assert!((e0 - e1).norm() < 1e-12);
    }

    // Fixed point: the chart center re-centers to itself.
    let north = Sphere::new(2).north_point::<f64>();
    let r = s2.recenter(&north);
    assert_eq!(r.coords, north.coords);
    assert_eq!(r.anchor, north.anchor);

    // Flat manifolds: identity.
    let r2 = manifold::make::<f64>(ManifoldId::Euclidean(2));
    let x = Point::from_slice(&[1.0, 2.0]);
    assert_eq!(r2.recenter(&x), x);
}

#[test]
fn project_to_tangent_examples() {
    let s2 = manifold::make::<f64>(ManifoldId::Sphere(2));
    let north = Sphere::new(2).north_point::<f64>();
    let w = DVector::from_column_slice(&[1.0, 2.0, 3.0]);
    let tv = s2.project_to_tangent(&north, &w).unwrap();
    let amb = s2.embed_tangent(&tv).unwrap();
    assert_relative_eq!(amb, DVector::from_column_slice(&[1.0, 2.0, 0.0]), epsilon = 1e-12);

    // Idempotence.
    let tv2 = s2.project_to_tangent(&north, &amb).unwrap();
    assert_relative_eq!(tv.components, tv2.components, epsilon = 1e-12);

    // Normal vectors project to zero.
    let tv3 = s2
        .project_to_tangent(&north, &DVector::from_column_slice(&[0.0, 0.0, 5.0]))
        .unwrap();
    assert_abs_diff_eq!(tv3.components.norm(), 0.0, epsilon = 1e-12);

    // Euclidean: identity.
    let r3 = manifold::make::<f64>(ManifoldId::Euclidean(3));
    let x = Point::from_slice(&[0.0, 0.0, 0.0]);
    let tv = r3.project_to_tangent(&x, &w).unwrap();
    assert_relative_eq!(tv.components, w, epsilon = 1e-14);
}

#[test]
fn tangent_pushforward_is_orthogonal_to_normal() {
    // Embedded tangent vectors are orthogonal to the sphere normal.
    let s3 = manifold::make::<f64>(ManifoldId::Sphere(3));
    let mut r = rng(13);
    for _ in 0..20 {
        let x = random_point(ManifoldId::Sphere(3), &mut r);
        let raw = DVector::from_fn(3, |_, _| r.gen_range(-1.0..1.0));
        let v = TangentVector::new(x.clone(), raw);
        let amb = s3.embed_tangent(&v).unwrap();
        let normal = s3.embed(&x).unwrap();
        assert_abs_diff_eq!(amb.dot(&normal), 0.0, epsilon = 1e-10);
    }
}

#[test]
fn spd_log_is_unsupported() {
    let spd = manifold::make::<f64>(ManifoldId::Spd(2));
    let x = Point::new(manifold::Spd::new(2).identity_coords::<f64>());
    let mut y = x.clone();
    y.coords[0] += 0.1;
    assert!(matches!(
        spd.log(&x, &y),
        Err(scoremeans::Error::Unsupported(_))
    ));
    let lm = manifold::make::<f64>(ManifoldId::Landmarks { points: 2, ambient: 2 });
    let a = Point::from_slice(&[0.0, 0.0, 3.0, 0.0]);
    let b = Point::from_slice(&[0.1, 0.0, 3.0, 0.2]);
    assert!(matches!(lm.log(&a, &b), Err(scoremeans::Error::Unsupported(_))));
}

#[test]
fn divergence_examples() {
    // V(x) = x on R^2 has divergence 2; constant fields have divergence 0.
    let r2 = manifold::make::<f64>(ManifoldId::Euclidean(2));
    let x = Point::from_slice(&[0.4, -1.1]);
    let div = divergence(r2.as_ref(), |p: &Point<f64>| p.coords.clone(), &x).unwrap();
    assert_abs_diff_eq!(div, 2.0, epsilon = 1e-8);
    let div = divergence(
        r2.as_ref(),
        |_: &Point<f64>| DVector::from_column_slice(&[3.0, -1.0]),
        &x,
    )
    .unwrap();
    assert_abs_diff_eq!(div, 0.0, epsilon = 1e-10);

    // Stereographic chart: div(u) = 2 - 4 |u|^2 / (1 + |u|^2).
    let s2 = manifold::make::<f64>(ManifoldId::Sphere(2));
    for u in [[0.0, 0.0], [0.3, 0.1], [-0.5, 0.4]] {
        let p = Point::with_anchor(
            DVector::from_column_slice(&u),
            DVector::from_column_slice(&[0.0, 0.0, 1.0]),
        );
        let s: f64 = u.iter().map(|v| v * v).sum();
        let expected = 2.0 - 4.0 * s / (1.0 + s);
        let div = divergence(s2.as_ref(), |p: &Point<f64>| p.coords.clone(), &p).unwrap();
        assert_abs_diff_eq!(div, expected, epsilon = 1e-8);
    }
}

#[test]
fn divergence_satisfies_divergence_theorem_quadrature() {
    // Integral of div V over a chart disc equals the boundary flux, both by
    // quadrature; independent check of the local-coordinate formula.
    let s2 = manifold::make::<f64>(ManifoldId::Sphere(2));
    let anchor = DVector::from_column_slice(&[0.0, 0.0, 1.0]);
    let center = [0.25, -0.1];
    let rho = 0.4;
    let lambda = |u: &[f64]| {
        let s: f64 = u.iter().map(|v| v * v).sum();
        4.0 / (1.0 + s).powi(2)
    };
    let field = |p: &Point<f64>| p.coords.clone();

    // Interior integral: polar grid, area element lambda du (vol = sqrt(det g)).
    let nr = 200;
    let na = 256;
    let mut interior = 0.0;
    for ir in 0..nr {
        let r = rho * (ir as f64 + 0.5) / nr as f64;
        let dr = rho / nr as f64;
        for ia in 0..na {
            let phi = std::f64::consts::TAU * ia as f64 / na as f64;
            let u = [center[0] + r * phi.cos(), center[1] + r * phi.sin()];
            let p = Point::with_anchor(DVector::from_column_slice(&u), anchor.clone());
            let div = divergence(s2.as_ref(), field, &p).unwrap();
            interior += div * lambda(&u) * r * dr * (std::f64::consts::TAU / na as f64);
        }
    }

    // Boundary flux: <V, n>_g d l_g = lambda (V . e_r) rho d phi for a
    // conformal metric.
    let nb = 4096;
    let mut flux = 0.0;
    for ib in 0..nb {
        let phi = std::f64::consts::TAU * ib as f64 / nb as f64;
        let er = [phi.cos(), phi.sin()];
        let u = [center[0] + rho * er[0], center[1] + rho * er[1]];
        let v = u; // field value
        let vr = v[0] * er[0] + v[1] * er[1];
        flux += lambda(&u) * vr * rho * (std::f64::consts::TAU / nb as f64);
    }

    assert_relative_eq!(interior, flux, epsilon = 1e-4, max_relative = 1e-4);
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Sphere exp/log round trip inside the injectivity radius.
        #[test]
        fn sphere_exp_log_round_trip(
            ax in -1.0f64..1.0, ay in -1.0f64..1.0, az in 0.1f64..1.0,
            u1 in -0.5f64..0.5, u2 in -0.5f64..0.5,
            c1 in -1.0f64..1.0, c2 in -1.0f64..1.0,
            norm in 0.01f64..0.5,
        ) {
            let s2 = Sphere::new(2);
            let anchor = DVector::from_column_slice(&[ax, ay, az]).normalize();
            let x = Point::with_anchor(DVector::from_column_slice(&[u1, u2]), anchor);
            let raw = DVector::from_column_slice(&[c1, c2]);
            prop_assume!(raw.norm() > 1e-3);
            let v = TangentVector::new(x.clone(), raw.clone());
            let n = Manifold::<f64>::norm(&s2, &v).unwrap();
            let v = TangentVector::new(x.clone(), raw * (norm / n));
            let y = Manifold::<f64>::exp(&s2, &v).unwrap();
            let back = Manifold::<f64>::log(&s2, &x, &y).unwrap();
            prop_assert!((back.components - v.components).norm() < 1e-6);
        }

        /// Landmark metric is SPD whenever the landmarks are separated.
        #[test]
        fn landmark_metric_spd(
            j1 in -0.9f64..0.9, j2 in -0.9f64..0.9, j3 in -0.9f64..0.9,
        ) {
            let lm = Landmarks::new(3, 1);
            let coords = DVector::from_column_slice(&[j1, 3.0 + j2, 6.0 + j3]);
            let x = Point::new(coords);
            let md = Manifold::<f64>::metric_at(&lm, &x).unwrap();
            let d = 3;
            let prod = &md.g * &md.g_inv;
            prop_assert!((prod - nalgebra::DMatrix::<f64>::identity(d, d)).norm() < 1e-8);
        }
    }
}

#[test]
fn sym_coordinate_layout() {
    let sym = Sym::new(3);
    assert_eq!(sym.coord_index(0, 0), 0);
    assert_eq!(sym.coord_index(0, 2), 2);
    assert_eq!(sym.coord_index(1, 1), 3);
    assert_eq!(sym.coord_index(1, 2), 4);
    assert_eq!(sym.coord_index(2, 2), 5);
    // Embedding of identity coordinates is the identity matrix.
    let m = Manifold::<f64>::embed(&sym, &Point::new(sym.identity_coords::<f64>())).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let expect = if i == j { 1.0 } else { 0.0 };
            assert_eq!(m[i * 3 + j], expect);
        }
    }
}

#[test]
fn manifold_id_parsing_round_trip() {
    for id in all_ids() {
        let s = id.to_string();
        let parsed: ManifoldId = s.parse().unwrap();
        assert_eq!(parsed, id);
    }
    assert!("x5".parse::<ManifoldId>().is_err());
    assert!("r0".parse::<ManifoldId>().is_err());
    assert!("lm2".parse::<ManifoldId>().is_err());
    assert_eq!(
        "lm30x2".parse::<ManifoldId>().unwrap(),
        ManifoldId::Landmarks { points: 30, ambient: 2 }
    );
    assert_eq!(ManifoldId::Landmarks { points: 30, ambient: 2 }.dim(), 60);
    assert_eq!(ManifoldId::Sym(3).dim(), 6);
    assert_eq!(ManifoldId::Spd(4).dim(), 10);
}
