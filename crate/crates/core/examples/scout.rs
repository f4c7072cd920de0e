// Dev scratch probe: prints the derived quantities that the integration
// tests pin down. Not part of the deliverable.

use onsflux::flux::{flux_cet, flux_dr, sweep, FitWindow};
use onsflux::grid::{lp_norm, sample_function, GridField};
use onsflux::kernels::{mollify, DiscreteKernel, KernelProfile};
use onsflux::norms::vmo_modulus;
use onsflux::synth::{burgers_shock, shear_layer, weierstrass_field};
use onsflux::traces::{bd_jump_formula_check, Interface, TraceOptions};
use std::f64::consts::PI;
use std::time::Instant;

fn signed_tube(f: &GridField, iface: &Interface, width: f64) -> f64 {
    let mut acc = 0.0;
    for node in 0..f.node_count() {
        let x = f.position(&f.decode(node));
        if iface.signed_distance(&x, 0.0, f.lengths()).abs() <= width {
            acc += f.data()[node];
        }
    }
    acc * f.cell_volume()
}

fn main() {
    let t0 = Instant::now();
    let n = 256;
    let h = 1.0 / n as f64;

    // Burgers DR mass with half-cell interfaces
    {
        let (u, _) = burgers_shock(1.0, -1.0, 0.0, n, 1.0).unwrap();
        let mid = Interface::new(&[1.0, 0.0], 0.5 + h / 2.0, 0.0).unwrap();
        for profile in [KernelProfile::Bump, KernelProfile::Quartic] {
            for cells in [4.0, 8.0, 16.0] {
                let k = DiscreteKernel::build(profile, cells * h, &u).unwrap();
                let f = flux_dr(&u, &k).unwrap();
                println!(
                    "burgers {:>8} ell={:>2}h  l1/2={:.5} tube(mid)={:+.5} signed-total={:+.2e}",
                    profile.name(),
                    cells,
                    f.l1() / 2.0,
                    signed_tube(&f.values, &mid, 2.0 * cells * h),
                    f.total(),
                );
            }
        }
        println!("  [{:?}]", t0.elapsed());
    }

    // Weierstrass slopes on the 5-scale window
    {
        let cells = [4.0, 8.0, 16.0, 32.0, 64.0];
        for theta in [0.2, 1.0 / 3.0, 0.5] {
            for seed in [7u64, 11] {
                let u = weierstrass_field(theta, 6, seed, n, 1.0).unwrap();
                let scales: Vec<f64> = cells.iter().map(|c| c * h).collect();
                let s = sweep(&u, None, KernelProfile::Bump, &scales, FitWindow::all()).unwrap();
                print!(
                    "weier {theta:.3} seed={seed}: dr={:+.3} (tgt {:+.3}) r2={:.2}  ",
                    s.fit_dr.unwrap().slope,
                    3.0 * theta - 1.0,
                    s.fit_dr.unwrap().r2
                );
            }
            println!();
        }
        println!("  [{:?}]", t0.elapsed());
    }

    // Sharp sheet after the interface shift: parity and CET pairing
    {
        let (u, _) = shear_layer(1.0, -1.0, 0.0, n, 1.0).unwrap();
        let phi = sample_function(1, &[n, n], &[1.0, 1.0], |x, out| {
            out[0] = (2.0 * PI * x[1]).cos() + 0.5 * (2.0 * PI * x[0]).sin();
        })
        .unwrap();
        for cells in [4.0, 8.0, 16.0, 32.0] {
            let k = DiscreteKernel::build(KernelProfile::Bump, cells * h, &u).unwrap();
            let dr = flux_dr(&u, &k).unwrap();
            let cet = flux_cet(&u, &k).unwrap();
            println!(
                "sheet ell={:>2}h dr_linf={:.2e} cet_linf={:.2e} |<phi,cet>|={:.2e}",
                cells,
                lp_norm(&dr.values, f64::INFINITY).unwrap(),
                lp_norm(&cet.values, f64::INFINITY).unwrap(),
                cet.pair_with(&phi).unwrap().abs()
            );
        }
        println!("  [{:?}]", t0.elapsed());
    }

    // BD tube ratio at the physical interface
    {
        let (u, _) = shear_layer(1.0, -1.0, 0.0, n, 1.0).unwrap();
        let iface = Interface::new(&[0.0, 1.0], 0.5 + h / 2.0, 0.0).unwrap();
        let rep = bd_jump_formula_check(
            &u,
            &iface,
            &[8.0 * h, 4.0 * h],
            KernelProfile::Bump,
            &TraceOptions::default(),
        )
        .unwrap();
        println!(
            "bd jump: integral={:.6} ratios={:?}",
            rep.jump_integral, rep.ratios
        );
        println!("  [{:?}]", t0.elapsed());
    }

    // Jump residuals for criterion 5 after the shift
    {
        use onsflux::traces::{jump_residuals, TraceData};
        let (u, p) = shear_layer(1.0, -1.0, 0.0, n, 1.0).unwrap();
        let iface = Interface::new(&[0.0, 1.0], 0.5, 0.0).unwrap();
        let radii = [4.0 * h, 2.0 * h];
        let rep = jump_residuals(
            &TraceData::Snapshot(&u),
            &TraceData::Snapshot(&p),
            &iface,
            &radii,
            &TraceOptions::default(),
        )
        .unwrap();
        println!(
            "sheet jumps: r_inc={:.2e} r_p={:.2e} d_sigma={:.2e}",
            rep.aggregates.r_inc_l1, rep.aggregates.r_p_l1, rep.aggregates.d_sigma_l1
        );
        let (u, _) = burgers_shock(1.0, -1.0, 0.0, n, 1.0).unwrap();
        let p0 = GridField::zeros(1, u.shape(), u.lengths()).unwrap();
        let iface = Interface::new(&[1.0, 0.0], 0.5, 0.0).unwrap();
        let rep = jump_residuals(
            &TraceData::Snapshot(&u),
            &TraceData::Snapshot(&p0),
            &iface,
            &radii,
            &TraceOptions::default(),
        )
        .unwrap();
        println!(
            "burgers jumps: r_inc={:.4} d_sigma/len={:.4}",
            rep.aggregates.r_inc_l1,
            rep.aggregates.d_sigma_l1 / rep.aggregates.length
        );
        println!("  [{:?}]", t0.elapsed());
    }

    // VMO of a mollified rough field, radii below the smoothing scale
    {
        let u = weierstrass_field(0.4, 5, 7, 128, 1.0).unwrap();
        let h1 = 1.0 / 128.0;
        let k = DiscreteKernel::build(KernelProfile::Bump, 16.0 * h1, &u).unwrap();
        let smoothed = mollify(&u, &k).unwrap();
        let radii: Vec<f64> = [2.0, 4.0, 8.0].iter().map(|c| c * h1).collect();
        let rep = vmo_modulus(&smoothed.component(0), &radii).unwrap();
        println!(
            "mollified-field vmo slope = {:.3} r2={:.3} verdict={:?}",
            rep.fit.unwrap().slope,
            rep.fit.unwrap().r2,
            rep.verdict
        );
        println!("  [{:?}] total", t0.elapsed());
    }
}
