use lvr_core::experiments::ResultRow;
use plotters::prelude::*;

use crate::error::CliError;

/// Constant-block ARB deviation from the Poisson benchmark against `rho_b`.
pub fn figure1_svg(rows: &[ResultRow]) -> Result<String, CliError> {
    let err = |e: &dyn std::fmt::Display| CliError::Chart(e.to_string());
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.rho_b, r.delta_arb_pct())).collect();
    let (x0, x1) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (y0, y1) = pts
        .iter()
        .fold((0.0f64, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    let pad = ((y1 - y0) * 0.1).max(0.5);
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, (720, 480)).into_drawing_area();
        root.fill(&WHITE).map_err(|e| err(&e))?;
        let mut chart = ChartBuilder::on(&root)
            .caption("Constant-block ARB vs Poisson (%)", ("sans-serif", 20))
            .margin(16)
            .x_label_area_size(36)
            .y_label_area_size(52)
            .build_cartesian_2d(x0..x1.max(x0 + 1.0), (y0 - pad)..(y1.max(0.0) + pad))
            .map_err(|e| err(&e))?;
        chart
            .configure_mesh()
            .x_desc("rho_b")
            .y_desc("diff %")
            .draw()
            .map_err(|e| err(&e))?;
        chart
            .draw_series(LineSeries::new(pts.iter().copied(), &BLUE))
            .map_err(|e| err(&e))?;
        chart
            .draw_series(pts.iter().map(|p| Circle::new(*p, 3, BLUE.filled())))
            .map_err(|e| err(&e))?;
        root.present().map_err(|e| err(&e))?;
    }
    Ok(svg)
}
