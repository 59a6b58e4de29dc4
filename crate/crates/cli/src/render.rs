//! Plain-text reports.

use std::fmt::Write as _;

use padyn_core::digraph::{
    ComponentRoute, ComponentSelection, ComponentVerdict, ErgodicVerdict, MpVerdict,
};
use padyn_core::global::{
    GlobalAnswer, GlobalFailure, GlobalReport, ObstructionWitness, RootFreeness, WitnessCheck,
    WitnessKind,
};
use padyn_core::padic::{fmt_rational, HenselResult};
use padyn_core::scaling::Classification;
use padyn_core::{Error, LevelDigraph, Polynomial, Prime, ScalingReport};

/// Extra context for errors whose message alone does not say what to change.
pub fn hint(e: &Error) -> Option<&'static str> {
    Some(match e {
        Error::PoleInDomain { .. } => {
            "the denominator vanishes in the domain, so the map is not defined on all of it"
        }
        Error::DerivativeRootInDomain { .. } => {
            "no uniform scaling radius exists; `classify` still bounds |f'|"
        }
        Error::NotLocally1Lipschitz { .. } => {
            "level digraphs and measure checks need |f'| <= 1 on the domain"
        }
        Error::NotForwardInvariant { .. } => "the map sends part of the domain outside it",
        Error::LevelTooCoarse { .. } => "digraph levels must be at or below the admissible level",
        Error::DepthCapExceeded { .. } | Error::RootFreenessUnresolved { .. } => {
            "a root may sit very close to the listed ball; raise --cap to search deeper"
        }
        Error::TooManyBalls { .. } => "choose a coarser level or raise --ball-cap",
        Error::PoleInQp { .. } => "the map has a pole in Qp, so it is not a map of Qp into itself",
        Error::HenselPreconditionFailed { .. } => "pick a seed closer to a simple root",
        _ => return None,
    })
}

fn class_name(c: &Classification) -> String {
    match c {
        Classification::LocallyIsometric => "LocallyIsometric".into(),
        Classification::Locally1Lipschitz => "Locally1Lipschitz".into(),
        Classification::BoundedScaling { bound_exponent } => {
            format!("BoundedScaling (max |f'| = p^{bound_exponent})")
        }
        Classification::LocallyRhoLipschitz { rho_exponent } => {
            format!("LocallyRhoLipschitz (max |f'| = p^{rho_exponent})")
        }
    }
}

pub fn classification(r: &ScalingReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "classification: {}", class_name(&r.classification));
    match r.radius_exponent {
        Some(l) => {
            let _ = writeln!(out, "scaling radius: p^{l}");
        }
        None => {
            let why = r
                .derivative_obstruction
                .as_ref()
                .map_or_else(String::new, |e| format!(" ({e})"));
            let _ = writeln!(out, "scaling radius: none, derivative may vanish{why}");
        }
    }
    let _ = writeln!(out, "max |f'|: p^{}", r.max_scalar_exponent);
    if !r.scalar_profile.is_empty() {
        let _ = writeln!(out, "local scalars |f'| by ball:");
        for (ball, e) in &r.scalar_profile {
            let _ = writeln!(out, "  {ball}: p^{e}");
        }
    }
    out
}

pub fn radius(prime: Prime, r: &ScalingReport) -> String {
    let l = r.radius_exponent.expect("scaling_radius returns a radius");
    let mut out = format!("l = {l} (radius {prime}^{l})\n");
    let _ = writeln!(out, "b(Q) = p^{}", r.b_q_exponent);
    if let Some(b) = r.b_t1_exponent {
        let _ = writeln!(out, "b(T1) = p^{b}");
    }
    if r.frame_shift != 0 {
        let _ = writeln!(
            out,
            "bounds computed after scaling x by p^{}",
            r.frame_shift
        );
    }
    out
}

fn key(g: &LevelDigraph, i: usize) -> String {
    fmt_rational(g.vertices[i].key())
}

fn cycles(out: &mut String, g: &LevelDigraph) {
    let d = g.cycles();
    let lengths: Vec<String> = d.cycle_lengths().iter().map(usize::to_string).collect();
    let _ = writeln!(
        out,
        "cycles: {} (lengths {})",
        d.cycles.len(),
        lengths.join(", ")
    );
    for c in &d.cycles {
        let keys: Vec<String> = c.iter().map(|&i| key(g, i)).collect();
        let _ = writeln!(out, "  ({})", keys.join(" "));
    }
    let _ = writeln!(out, "tail vertices: {}", d.tail_vertices.len());
}

pub fn digraph(g: &LevelDigraph) -> String {
    let mut out = format!("G(f, {}^{}): {} vertices\n", g.prime, g.level, g.len());
    for (i, &j) in g.edges.iter().enumerate() {
        let _ = writeln!(out, "  {} -> {}", key(g, i), key(g, j));
    }
    cycles(&mut out, g);
    out
}

pub fn subsidiary(g: &LevelDigraph) -> String {
    let data = g
        .subsidiary
        .as_ref()
        .expect("subsidiary digraph carries edge data");
    let kept = data.iter().filter(|d| d.passes).count();
    let mut out = format!(
        "G*(f, {}^{}): {} of {} edges kept\n",
        g.prime,
        g.level,
        kept,
        g.len()
    );
    for (i, d) in data.iter().enumerate() {
        let b = d.bound_exponents.map(|b| b.to_string());
        let _ = writeln!(
            out,
            "  {} -> {}  s={} bounds=[{}] {}",
            key(g, i),
            key(g, g.edges[i]),
            d.s_exponent,
            b.join(", "),
            if d.passes { "kept" } else { "dropped" }
        );
    }
    let _ = writeln!(
        out,
        "G* = G: {}",
        if kept == g.len() { "yes" } else { "no" }
    );
    out
}

pub fn mp(v: &MpVerdict) -> String {
    match v {
        MpVerdict::MeasurePreserving { intrinsic_level } => {
            format!("MeasurePreserving (certified through intrinsic level {intrinsic_level})\n")
        }
        MpVerdict::NotMeasurePreserving(w) => {
            let pre: Vec<String> = w.preimages.iter().map(ToString::to_string).collect();
            format!(
                "NotMeasurePreserving at level {}: {} has preimages {}; {} has none\n",
                w.level,
                w.crowded,
                pre.join(", "),
                w.missed
            )
        }
        MpVerdict::Undecided { checked_down_to } => {
            format!("Undecided: every level down to {checked_down_to} is a union of cycles\n")
        }
    }
}

pub fn ergodic(v: &ErgodicVerdict) -> String {
    match v {
        ErgodicVerdict::NotErgodic {
            level,
            cycle_count,
            tail_count,
        } => format!(
            "NotErgodic at level {level} ({cycle_count} cycles, {tail_count} tail vertices)\n"
        ),
        ErgodicVerdict::SingleCycleToDepth { depth } => {
            format!("Undecided: single cycle at every level down to {depth}\n")
        }
    }
}

fn component_verdict(v: &ComponentVerdict) -> String {
    match v {
        ComponentVerdict::MeasurePreserving => "MeasurePreserving".into(),
        ComponentVerdict::NotMeasurePreserving { level } => {
            format!("NotMeasurePreserving (fails at level {level})")
        }
        ComponentVerdict::Undecided { checked_down_to } => {
            format!("Undecided (checked down to {checked_down_to})")
        }
    }
}

pub fn components(parts: &[ComponentSelection]) -> String {
    let mut out = String::new();
    for (i, c) in parts.iter().enumerate() {
        let keys: Vec<String> = c.cycle.iter().map(|b| fmt_rational(b.key())).collect();
        let route = match c.route {
            ComponentRoute::IsometricCycles => "isometric cycle".to_string(),
            ComponentRoute::RefinedCycles { level } => {
                format!("cycles of the restriction at level {level}")
            }
            ComponentRoute::DirectCheck => "direct check".to_string(),
        };
        let _ = writeln!(
            out,
            "component {}: cycle ({}) at level {}",
            i + 1,
            keys.join(" "),
            c.level
        );
        let _ = writeln!(out, "  domain: {}", c.domain);
        let _ = writeln!(
            out,
            "  verdict: {} via {route}",
            component_verdict(&c.verdict)
        );
    }
    out
}

fn answer(a: &GlobalAnswer) -> String {
    match a {
        GlobalAnswer::Yes => "Yes".into(),
        GlobalAnswer::Undecided => "Undecided".into(),
        GlobalAnswer::No(why) => match why {
            GlobalFailure::Gate => "No (degree gate fails)".into(),
            GlobalFailure::NotForwardInvariant { escaping } => {
                format!("No ({escaping} leaves the ball)")
            }
            GlobalFailure::NotLocallyIsometric => "No (not locally isometric on the ball)".into(),
            GlobalFailure::NotMeasurePreservingOnBall { level } => {
                format!("No (level {level} digraph on the ball is not a union of cycles)")
            }
        },
    }
}

pub fn global(iso: &GlobalReport, mp: &GlobalReport) -> String {
    let g = &iso.gate;
    let mut out = format!(
        "gate: alpha = {}, m = {}, n = {}: {}\n",
        g.alpha,
        g.m,
        g.n,
        if g.gate_passed { "passed" } else { "failed" }
    );
    if let Some(n) = g.n_exponent {
        let _ = writeln!(out, "N = {n}");
    }
    match &g.root_freeness {
        RootFreeness::Proven {
            lower_bound_exponent,
        } => {
            let _ = writeln!(
                out,
                "denominator root-free on Qp, |Q1| >= p^{lower_bound_exponent}"
            );
        }
        RootFreeness::RootFound { ball } => {
            let _ = writeln!(out, "denominator has a root in {ball}");
        }
        RootFreeness::Unresolved { level } => {
            let _ = writeln!(out, "denominator root-freeness unresolved at level {level}");
        }
    }
    if let Some(l) = iso.ball_level {
        let _ = writeln!(out, "reduced to B(0, {l})");
    }
    let _ = writeln!(out, "invertible local isometry: {}", answer(&iso.answer));
    let _ = writeln!(out, "measure-preserving: {}", answer(&mp.answer));
    out
}

pub fn witness(prime: Prime, w: &ObstructionWitness, check: &WitnessCheck, depth: i64) -> String {
    let l = w.level;
    let region = match w.kind {
        WitnessKind::InvariantBall => format!("InvariantBall: f maps B(0, {l}) = {{|x| <= {prime}^{l}}} into itself"),
        WitnessKind::EscapingRegion => {
            format!("EscapingRegion: f maps {{|x| >= {prime}^{l}}} into itself, so those orbits avoid B(0, {})", l - 1)
        }
        WitnessKind::InvariantSphere => format!("InvariantSphere: f maps {{|x| = {prime}^{l}}} into itself"),
        WitnessKind::ContractingBall => {
            format!("ContractingBall: f maps B(0, {l}) into B(0, {}), so measure is not preserved", l - 1)
        }
        WitnessKind::ExpandingRegion => format!(
            "ExpandingRegion: |x| > {prime}^{l} implies |f(x)| > {prime}^{}, so measure is not preserved",
            l + 1
        ),
    };
    let mut out = format!("{region}\n");
    let _ = writeln!(out, "case: {:?}", w.case);
    let _ = write!(out, "radii: N0 = {}, N = {}", w.n0_exponent, w.n_exponent);
    if let Some(l1) = w.l1_exponent {
        let _ = write!(out, ", l1 = {l1}");
    }
    let _ = writeln!(
        out,
        "\nverified at {} sampled points given to level {depth}",
        check.samples
    );
    out
}

pub fn hensel(prime: Prime, f: &Polynomial, r: &HenselResult) -> String {
    let residual = prime.valuation(&f.eval(&r.root));
    format!(
        "root: {}\n|root - seed| <= {prime}^{}\nv(F(root)) = {residual} (precision {})\n",
        fmt_rational(&r.root),
        r.bound_exponent,
        r.precision
    )
}
