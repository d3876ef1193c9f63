use gaugesim::lattice::*;
use gaugesim::oracle::trotter_error_study;

fn run(n: usize, t_f: f64, f: f64, mu: f64) {
    let lat = LatticeSpec::new(n, Boundary::Periodic).unwrap();
    let params = ModelParams::new(1.0, f, mu, 0.3, 1).unwrap();
    let grid = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.6, 0.7, 0.8, 0.9, 1.0];
    let t0 = std::time::Instant::now();
    let table = trotter_error_study(&params, &lat, &grid, t_f).unwrap();
    let pts: Vec<(f64, f64)> = table.iter().filter(|(dt, _)| *dt <= 0.4 + 1e-9).map(|(dt, de)| (dt.ln(), de.ln())).collect();
    let nn = pts.len() as f64;
    let (sx, sy): (f64, f64) = (pts.iter().map(|p| p.0).sum(), pts.iter().map(|p| p.1).sum());
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
    let intercept = (sy - slope * sx) / nn;
    let ratios: Vec<String> = table.iter().filter(|(dt, _)| *dt >= 0.6).map(|(dt, de)| {
        let fit = (intercept + slope * dt.ln()).exp();
        format!("{dt:.1}:{:.2}", de / fit)
    }).collect();
    println!("N={n} t_f={t_f} f={f} mu={mu}: slope={slope:.3} ratios=[{}] ({:.1?})", ratios.join(" "), t0.elapsed());
}

fn main() {
    run(4, 10.0, 0.75, 0.35);
    run(4, 20.0, 0.75, 0.35);
    run(4, 30.0, 0.75, 0.35);
    run(6, 10.0, 0.75, 0.35);
    run(8, 10.0, 0.75, 0.35);
}
