use aliaslab::geometry::{DiskPhantom, RadonFamily, SamplingScheme, Vec2};
use aliaslab::recon::{ReconConfig, Reconstruction, Region};
use aliaslab::sinogram::{SemiDiscreteData, SinogramSampler};

fn crt(phantom: DiskPhantom, eps: f64, n: usize, shift: f64, region: Region) -> Reconstruction {
    let scheme = SamplingScheme::line_half_turn(eps, n, shift);
    let data = SemiDiscreteData::new(scheme, SinogramSampler::new(RadonFamily::Line, phantom), 32);
    Reconstruction::build(&data, &ReconConfig::default(), region).unwrap()
}

fn unit_disk() -> DiskPhantom {
    DiskPhantom::new(Vec2::new(0.0, 0.0), 5.0, 1.0).unwrap()
}

#[test]
fn disk_interior_and_exterior_values() {
    let region = Region::around(Vec2::new(0.0, 0.0), 10.0);
    let rec = crt(unit_disk(), 0.02, 200, 0.03, region);
    let centre = rec.value_at(Vec2::new(0.0, 0.0)).unwrap();
    assert!((centre - 1.0).abs() <= 0.05, "centre {centre}");
    let inner = rec.value_at(Vec2::new(2.0, -1.5)).unwrap();
    assert!((inner - 1.0).abs() <= 0.05, "inner {inner}");
    // streaks from the finite view count are strongest far out; their
    // average over a ring stays small
    let ring: Vec<f64> = (0..180)
        .map(|i| rec.value_at(Vec2::from_angle(0.003 + i as f64 * 0.0349) * 9.5).unwrap())
        .collect();
    let mean = ring.iter().map(|v| v.abs()).sum::<f64>() / ring.len() as f64;
    assert!(mean <= 0.05, "exterior mean {mean}");
}

#[test]
fn outside_the_filter_grid_is_an_error() {
    let rec = crt(unit_disk(), 0.02, 40, 0.0, Region::around(Vec2::new(0.0, 0.0), 1.0));
    assert!(rec.value_at(Vec2::new(30.0, 0.0)).is_err());
}

#[test]
fn reconstruction_is_linear_in_the_phantom() {
    let a = DiskPhantom::new(Vec2::new(1.0, 0.5), 2.0, 1.0).unwrap();
    let b = DiskPhantom::new(Vec2::new(1.0, 0.5), 2.0, -2.5).unwrap();
    let region = Region::around(Vec2::new(0.0, 0.0), 4.0);
    let ra = crt(a, 0.05, 64, 0.2, region);
    let rb = crt(b, 0.05, 64, 0.2, region);
    for p in [Vec2::new(0.3, 0.2), Vec2::new(3.0, 0.5), Vec2::new(-1.2, 2.4)] {
        let va = ra.value_at(p).unwrap();
        let vb = rb.value_at(p).unwrap();
        assert!((vb + 2.5 * va).abs() <= 1e-9 * (1.0 + va.abs()), "{va} {vb}");
    }
}

#[test]
fn integer_shift_changes_nothing() {
    // α_k for shift δ+1 is α_{k+1} for shift δ; a full half-turn window
    // keeps the same set of lines
    let region = Region::around(Vec2::new(0.0, 0.0), 7.0);
    let r0 = crt(unit_disk(), 0.05, 64, 0.3, region);
    let r1 = crt(unit_disk(), 0.05, 64, 1.3, region);
    for p in [Vec2::new(0.0, 0.0), Vec2::new(5.2, 0.4), Vec2::new(-3.0, 4.1)] {
        let v0 = r0.value_at(p).unwrap();
        let v1 = r1.value_at(p).unwrap();
        assert!((v0 - v1).abs() <= 1e-9, "{p}: {v0} {v1}");
    }
}
