use std::fmt::Write;

use crate::formulation::Solution;
use crate::instance::Instance;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 40.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

/// Scatter plot of zones (discs sized by demand), candidate sites
/// (squares, filled when open) and one line per assigned zone.
///
/// Colours follow `clusters` (cluster per zone) when given, otherwise the
/// rank of the zone's site among open sites.
pub fn render_svg(instance: &Instance, solution: &Solution, clusters: Option<&[usize]>) -> String {
    let xs = instance
        .zones
        .iter()
        .map(|z| z.x)
        .chain(instance.sites.iter().map(|s| s.x));
    let ys = instance
        .zones
        .iter()
        .map(|z| z.y)
        .chain(instance.sites.iter().map(|s| s.y));
    let (x0, x1) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (y0, y1) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let scale = ((WIDTH - 2.0 * MARGIN) / (x1 - x0).max(1e-9)).min((HEIGHT - 2.0 * MARGIN) / (y1 - y0).max(1e-9));
    let px = |x: f64| MARGIN + (x - x0) * scale;
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) * scale;

    let open = solution.open_sites();
    let max_demand = (0..instance.num_zones())
        .map(|j| instance.demand(j))
        .max()
        .unwrap_or(1)
        .max(1) as f64;
    let colour = |j: usize| {
        let idx = match (clusters, solution.assignment.get(j).copied().flatten()) {
            (Some(c), _) => c.get(j).copied().unwrap_or(0),
            (None, Some(site)) => open.iter().position(|&i| i == site).unwrap_or(0),
            (None, None) => 0,
        };
        PALETTE[idx % PALETTE.len()]
    };

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();

    writeln!(out, r#"<g id="edges" stroke-width="1" stroke-opacity="0.6">"#).unwrap();
    for (j, zone) in instance.zones.iter().enumerate() {
        if let Some(Some(i)) = solution.assignment.get(j) {
            let site = &instance.sites[*i];
            writeln!(
                out,
                r#"<line class="edge" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}"/>"#,
                px(zone.x),
                py(zone.y),
                px(site.x),
                py(site.y),
                colour(j)
            )
            .unwrap();
        }
    }
    writeln!(out, "</g>").unwrap();

    writeln!(out, r#"<g id="zones" fill-opacity="0.7">"#).unwrap();
    for (j, zone) in instance.zones.iter().enumerate() {
        let r = 3.0 + 9.0 * (instance.demand(j) as f64 / max_demand).sqrt();
        writeln!(
            out,
            r#"<circle class="zone" cx="{:.2}" cy="{:.2}" r="{r:.2}" fill="{}"><title>zone {} demand {}</title></circle>"#,
            px(zone.x),
            py(zone.y),
            colour(j),
            zone.id,
            zone.demand
        )
        .unwrap();
    }
    writeln!(out, "</g>").unwrap();

    writeln!(out, r#"<g id="sites" stroke="black" stroke-width="1.5">"#).unwrap();
    for (i, site) in instance.sites.iter().enumerate() {
        let is_open = solution.open.get(i).copied().unwrap_or(false);
        let (class, fill) = if is_open {
            ("site open", "black")
        } else {
            ("site", "none")
        };
        writeln!(
            out,
            r#"<rect class="{class}" x="{:.2}" y="{:.2}" width="10" height="10" fill="{fill}"><title>site {}</title></rect>"#,
            px(site.x) - 5.0,
            py(site.y) - 5.0,
            site.id
        )
        .unwrap();
    }
    writeln!(out, "</g>").unwrap();
    out.push_str("</svg>\n");
    out
}
