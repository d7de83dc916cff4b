//! Report files for a stored experiment record.

use std::fmt::Write;

use entbench::analyze::{EntanglementGraph, SummaryRow};
use entbench::protocol::{
    CharacterisationResult, DecayAnalysis, Derived, Design, ExperimentRecord, GhzDecayResult, GhzFidelityResult,
    GraphDecayResult, GraphResult, MqcSummary,
};
use entbench::topology::DeviceGraph;
use plotters::prelude::*;
use serde_json::json;

/// `(file name, contents)` pairs.
pub type Files = Vec<(String, String)>;

const PALETTE: [RGBColor; 6] = [RGBColor(31, 119, 180), RGBColor(214, 39, 40), RGBColor(44, 160, 44), RGBColor(148, 103, 189), RGBColor(255, 127, 14), RGBColor(140, 86, 75)];

fn modes<'a, T>(raw: &'a Option<T>, mitigated: &'a Option<T>) -> Vec<(&'static str, &'a T)> {
    let mut v = vec![];
    if let Some(r) = raw {
        v.push(("raw", r));
    }
    if let Some(m) = mitigated {
        v.push(("mitigated", m));
    }
    v
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

/// Entanglement map: thick blue edges at or above half the maximal
/// negativity, thin red ones below.
pub fn entanglement_dot(g: &DeviceGraph, eg: &EntanglementGraph) -> String {
    let mut s = String::from("graph entanglement {\n  node [shape=circle, fontsize=10];\n");
    for q in 0..g.n_qubits() {
        let q = entbench::topology::QubitId(q);
        if g.is_active(q) {
            let _ = writeln!(s, "  {q};");
        } else {
            let _ = writeln!(s, "  {q} [style=dashed, color=gray];");
        }
    }
    for e in &eg.edges {
        let (color, width) = if e.negativity >= 0.25 { ("blue", 1.0 + 6.0 * e.negativity) } else { ("red", 1.0) };
        let _ = writeln!(
            s,
            "  {} -- {} [color={color}, penwidth={width:.2}, label=\"{:.3}\"];",
            e.edge.lo(),
            e.edge.hi(),
            e.negativity
        );
    }
    s.push_str("}\n");
    s
}

pub fn entanglement_graphml(g: &DeviceGraph, eg: &EntanglementGraph) -> String {
    let mut s = String::from(concat!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n",
        "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n",
        "  <key id=\"active\" for=\"node\" attr.name=\"active\" attr.type=\"boolean\"/>\n",
        "  <key id=\"negativity\" for=\"edge\" attr.name=\"negativity\" attr.type=\"double\"/>\n",
        "  <key id=\"se\" for=\"edge\" attr.name=\"se\" attr.type=\"double\"/>\n",
        "  <graph id=\"entanglement\" edgedefault=\"undirected\">\n",
    ));
    for q in 0..g.n_qubits() {
        let active = g.is_active(entbench::topology::QubitId(q));
        let _ = writeln!(s, "    <node id=\"q{q}\"><data key=\"active\">{active}</data></node>");
    }
    for e in &eg.edges {
        let _ = writeln!(
            s,
            "    <edge source=\"q{}\" target=\"q{}\"><data key=\"negativity\">{}</data><data key=\"se\">{}</data></edge>",
            e.edge.lo(),
            e.edge.hi(),
            e.negativity,
            e.se
        );
    }
    s.push_str("  </graph>\n</graphml>\n");
    s
}

pub fn edges_csv(eg: &EntanglementGraph) -> String {
    let mut s = String::from("edge,negativity,se,replicates\n");
    for e in &eg.edges {
        let _ = writeln!(s, "{},{},{},{}", e.edge.key(), e.negativity, e.se, e.replicates);
    }
    s
}

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

fn line_chart(title: &str, x_desc: &str, y_desc: &str, series: &[Series]) -> String {
    let all = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1) = (0.0, 1.0);
    } else if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if !y1.is_finite() || y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let pad = (y1 - y0) * 0.05;
    let mut out = String::new();
    {
        let root = SVGBackend::with_string(&mut out, (720, 440)).into_drawing_area();
        root.fill(&WHITE).expect("svg drawing");
        let mut chart = ChartBuilder::on(&root)
            .caption(title, ("sans-serif", 18))
            .margin(12)
            .x_label_area_size(40)
            .y_label_area_size(56)
            .build_cartesian_2d(x0..x1, (y0 - pad)..(y1 + pad))
            .expect("svg chart");
        chart.configure_mesh().x_desc(x_desc).y_desc(y_desc).draw().expect("svg mesh");
        for (i, s) in series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            chart
                .draw_series(LineSeries::new(s.points.iter().copied(), color.stroke_width(2)))
                .expect("svg series")
                .label(s.label.clone())
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(2)));
            chart
                .draw_series(s.points.iter().map(|&p| Circle::new(p, 3, color.filled())))
                .expect("svg markers");
        }
        chart.configure_series_labels().background_style(WHITE.mix(0.8)).border_style(BLACK).draw().expect("svg legend");
        root.present().expect("svg output");
    }
    out.push('\n');
    out
}

fn bar_chart(title: &str, values: &[(String, f64)]) -> String {
    let n = values.len().max(1);
    let mut out = String::new();
    {
        let root = SVGBackend::with_string(&mut out, ((n as u32 * 10 + 120).max(480), 360)).into_drawing_area();
        root.fill(&WHITE).expect("svg drawing");
        let mut chart = ChartBuilder::on(&root)
            .caption(title, ("sans-serif", 18))
            .margin(12)
            .x_label_area_size(36)
            .y_label_area_size(56)
            .build_cartesian_2d(0f64..n as f64, 0f64..0.55f64)
            .expect("svg chart");
        chart.configure_mesh().disable_x_mesh().x_desc("edge index").y_desc("negativity").draw().expect("svg mesh");
        chart
            .draw_series(values.iter().enumerate().map(|(i, (_, v))| {
                Rectangle::new([(i as f64 + 0.1, 0.0), (i as f64 + 0.9, v.max(0.0))], PALETTE[0].filled())
            }))
            .expect("svg bars");
        root.present().expect("svg output");
    }
    out.push('\n');
    out
}

fn summary_json(row: &SummaryRow) -> serde_json::Value {
    serde_json::to_value(row).expect("summary rows serialize")
}

/// Relative change of the mean negativity from raw to mitigated, in percent.
fn gain(raw: &GraphResult, mit: &GraphResult) -> Option<f64> {
    let (a, b) = (raw.summary.mean_negativity, mit.summary.mean_negativity);
    (a > 0.0).then(|| 100.0 * (b - a) / a)
}

fn characterisation(rec: &ExperimentRecord, r: &CharacterisationResult, files: &mut Files) -> String {
    let mut text = String::new();
    let _ = writeln!(text, "{} batches, {} device circuits, {} simulated", r.n_batches, r.device_circuits, r.simulated_circuits);
    let _ = writeln!(text, "{:<10} {:>6} {:>16} {:>5} {:>5} {:>5}  whole-device", "readout", "qubits", "mean N ± sd", "50%", "75%", "90%");
    let mut rows = serde_json::Map::new();
    for (mode, g) in modes(&r.raw, &r.mitigated) {
        let s = &g.summary;
        let _ = writeln!(
            text,
            "{mode:<10} {:>6} {:>8.4} ± {:<6.4} {:>5} {:>5} {:>5}  {}",
            s.qubits, s.mean_negativity, s.sd_negativity, s.connected_50, s.connected_75, s.connected_90, s.whole_device
        );
        if g.skipped_projections > 0 {
            let _ = writeln!(text, "{mode:<10} {} ring projections skipped for low shot counts", g.skipped_projections);
        }
        rows.insert(mode.into(), summary_json(s));
        files.push((format!("entanglement-{mode}.dot"), entanglement_dot(&rec.layout.graph, &g.graph)));
        files.push((format!("entanglement-{mode}.graphml"), entanglement_graphml(&rec.layout.graph, &g.graph)));
        files.push((format!("edges-{mode}.csv"), edges_csv(&g.graph)));
        let bars: Vec<(String, f64)> = g.graph.edges.iter().map(|e| (e.edge.key(), e.negativity)).collect();
        files.push((format!("negativity-{mode}.svg"), bar_chart(&format!("{} edge negativity ({mode})", rec.plan.device), &bars)));
    }
    let gain = match (&r.raw, &r.mitigated) {
        (Some(a), Some(b)) => gain(a, b),
        _ => None,
    };
    if let Some(p) = gain {
        let _ = writeln!(text, "mitigation changes the mean negativity by {p:+.1}%");
    }
    files.push((
        "summary.json".into(),
        pretty(&json!({ "n_batches": r.n_batches, "device_circuits": r.device_circuits, "rows": rows, "mitigation_gain_percent": gain })),
    ));
    text
}

fn graph_decay(r: &GraphDecayResult, files: &mut Files) -> String {
    let mut csv = String::from("dd,delay_us,readout,mean,sd\n");
    let mut edges = String::from("dd,delay_us,readout,edge,negativity\n");
    let mut series: Vec<Series> = Vec::new();
    for p in &r.points {
        for (mode, c) in modes(&p.raw, &p.mitigated) {
            let t = p.delay_ns as f64 / 1000.0;
            let _ = writeln!(csv, "{},{t},{mode},{},{}", p.dd, c.mean, c.sd);
            for (e, n) in &c.edges {
                let _ = writeln!(edges, "{},{t},{mode},{e},{n}", p.dd);
            }
            let label = format!("{} {mode}", p.dd);
            match series.iter_mut().find(|s| s.label == label) {
                Some(s) => s.points.push((t, c.mean)),
                None => series.push(Series { label, points: vec![(t, c.mean)] }),
            }
        }
    }
    files.push(("decay.csv".into(), csv.clone()));
    files.push(("edges-decay.csv".into(), edges));
    files.push(("decay.svg".into(), line_chart("Mean device negativity", "delay (µs)", "negativity", &series)));
    let mut text = String::from("mean negativity by delay\n");
    for s in &series {
        let _ = writeln!(
            text,
            "{:<24} {}",
            s.label,
            s.points.iter().map(|(t, n)| format!("{t}:{n:.3}")).collect::<Vec<_>>().join(" ")
        );
    }
    text
}

fn mqc_line(mode: &str, s: &MqcSummary) -> String {
    format!(
        "{mode:<10} P = {:.4} ± {:.4}  C = {:.4} ± {:.4}  F = {:.4} ± {:.4}\n",
        s.population.mean, s.population.se, s.coherence.mean, s.coherence.se, s.fidelity.mean, s.fidelity.se
    )
}

fn ghz_fidelity(r: &GhzFidelityResult, files: &mut Files) -> String {
    let mut text = format!(
        "GHZ-{} from qubit {} at CNOT depth {}; {} MQC + {} population circuits per replicate\n",
        r.n, r.source, r.depth, r.mqc_circuits, r.population_circuits
    );
    let mut csv = String::from("readout,replicate,phi,signal\n");
    let mut series = Vec::new();
    for (mode, s) in modes(&r.raw, &r.mitigated) {
        text.push_str(&mqc_line(mode, s));
        for (i, rep) in s.replicates.iter().enumerate() {
            for (phi, v) in &rep.signal {
                let _ = writeln!(csv, "{mode},{i},{phi},{v}");
            }
        }
        if let Some(first) = s.replicates.first() {
            series.push(Series { label: mode.into(), points: first.signal.clone() });
        }
    }
    files.push(("signal.csv".into(), csv));
    files.push(("signal.svg".into(), line_chart(&format!("MQC signal, N = {}", r.n), "phase (rad)", "S", &series)));
    files.push(("summary.json".into(), pretty(&serde_json::to_value(r).expect("results serialize"))));
    text
}

fn decay_lines(mode: &str, a: &DecayAnalysis, csv: &mut String, series: &mut Vec<Series>) -> String {
    let mut text = String::new();
    for s in &a.series {
        let _ = writeln!(
            text,
            "{mode:<10} N = {:>2}  alpha = {:.5} ± {:.5} /µs  T = {:.2} µs  R² = {:.4}",
            s.n,
            s.fit.alpha,
            s.fit.alpha_se(),
            s.fit.lifetime(),
            s.fit.r2
        );
        let pts: Vec<(f64, f64)> = s.delays_ns.iter().zip(&s.coherence).map(|(&t, c)| (t as f64 / 1000.0, c.mean)).collect();
        for ((t, c), st) in pts.iter().zip(&s.coherence) {
            let _ = writeln!(csv, "{mode},{},{t},{c},{}", s.n, st.se);
        }
        series.push(Series { label: format!("N={} {mode}", s.n), points: pts });
    }
    if let Some(l) = &a.scaling {
        let _ = writeln!(text, "{mode:<10} alpha(N) = {:.5} N + {:.5}  R² = {:.4}", l.slope, l.intercept, l.r2);
    }
    text
}

fn ghz_decay(r: &GhzDecayResult, files: &mut Files) -> String {
    let mut text = format!("decoupling: {}\n", r.dd);
    let mut csv = String::from("readout,n,delay_us,coherence,se\n");
    let mut series = Vec::new();
    for (mode, a) in modes(&r.raw, &r.mitigated) {
        text.push_str(&decay_lines(mode, a, &mut csv, &mut series));
    }
    files.push(("decay.csv".into(), csv));
    files.push(("decay.svg".into(), line_chart("GHZ coherence decay", "delay (µs)", "coherence", &series)));
    files.push(("summary.json".into(), pretty(&serde_json::to_value(r).expect("results serialize"))));
    text
}

/// Human-readable summary and report files for `rec`.
pub fn build(rec: &ExperimentRecord) -> (String, Files) {
    let mut files = Files::new();
    let mut text = format!("{} on {} ({} active qubits)\n", rec.plan.kind, rec.plan.device, rec.layout.graph.n_active());
    if let Design::Graph { schedule, .. } = &rec.design {
        files.push(("schedule.dot".into(), schedule.to_dot(rec.layout.graph.n_qubits())));
    }
    text.push_str(&match &rec.derived {
        Derived::GraphCharacterisation(r) => characterisation(rec, r, &mut files),
        Derived::GraphDecay(r) => graph_decay(r, &mut files),
        Derived::GhzFidelity(r) => ghz_fidelity(r, &mut files),
        Derived::GhzDecay(r) => ghz_decay(r, &mut files),
    });
    (text, files)
}
