use henon_core::io::{
    artifact_string, parse_artifact, parse_jsonl, render_records, tracks_from_records, tracks_to_records, write_jsonl,
    Projection, Record, RunConfig,
};
use henon_core::locus::{LocusCurve, LocusSample, WallTag};
use henon_core::model::ComponentReport;
use henon_core::motion::{InvariantKind, MotionInvariant, MotionTrack, Waypoint};
use henon_core::{HenonParameter, PhasePoint};
use num_complex::Complex64;
use proptest::prelude::*;
use std::collections::BTreeMap;

fn float() -> impl Strategy<Value = f64> {
    prop_oneof![-1e3..1e3f64, -1e-6..1e-6f64, any::<f64>().prop_filter("finite", |x| x.is_finite())]
}

fn complex() -> impl Strategy<Value = Complex64> {
    (float(), float()).prop_map(|(a, b)| Complex64::new(a, b))
}

fn point() -> impl Strategy<Value = PhasePoint> {
    (complex(), complex()).prop_map(|(x, y)| PhasePoint::new(x, y))
}

fn lambda() -> impl Strategy<Value = HenonParameter> {
    (1e-6..1.0f64, -1e-3..1e-3f64, complex())
        .prop_map(|(a, b, c)| HenonParameter::new(Complex64::new(a, b), c).unwrap())
}

fn wall() -> impl Strategy<Value = WallTag> {
    prop_oneof![
        Just(WallTag::YBound),
        Just(WallTag::UWall),
        Just(WallTag::GOuter),
        Just(WallTag::GInner),
        Just(WallTag::PWall)
    ]
}

fn invariant() -> impl Strategy<Value = MotionInvariant> {
    let kind = prop_oneof![
        (0usize..8).prop_map(|n| InvariantKind::PhiPlusPower { n }),
        Just(InvariantKind::YValue),
        Just(InvariantKind::UcValue)
    ];
    (kind, complex()).prop_map(|(kind, value)| MotionInvariant { kind, value })
}

fn track() -> impl Strategy<Value = MotionTrack> {
    let wp = (lambda(), point(), 0.0..1e-6f64).prop_map(|(lambda, p, residual)| Waypoint { lambda, p, residual });
    (invariant(), prop::collection::vec(wp, 0..5), any::<bool>(), prop::option::of((lambda(), "[a-z ]{0,12}"))).prop_map(
        |(invariant, waypoints, complete, failure)| MotionTrack { invariant, waypoints, complete, failure },
    )
}

fn curve() -> impl Strategy<Value = LocusCurve> {
    let sample = (point(), 0.0..1.0f64, prop::option::of(wall())).prop_map(|(p, r, w)| LocusSample {
        wall_tag: w,
        component_label: Some("01".parse().unwrap()),
        ..LocusSample::new(p, r)
    });
    (prop::collection::vec(sample, 0..6), any::<bool>(), wall(), float(), 0.0..10.0f64).prop_map(
        |(samples, closed, wall_tag, level, length)| LocusCurve { samples, closed, wall_tag, level, length, diagnostic: None },
    )
}

#[test]
fn default_config_round_trips() {
    let cfg = RunConfig::default();
    let text = cfg.to_json().unwrap();
    assert_eq!(RunConfig::parse(&text).unwrap(), cfg);
    // Every field has a default.
    assert_eq!(RunConfig::parse("{}").unwrap(), cfg);
}

#[test]
fn foreign_schema_version_is_rejected() {
    assert!(RunConfig::parse(r#"{"schemaVersion": 99}"#).is_err());
    assert!(parse_jsonl(r#"{"record":"header","schemaVersion":99,"lambda":{"a":[1e-4,0],"c":[-6,0]},"config":null}"#).is_err());
}

#[test]
fn component_report_artifact_round_trips() {
    let rep = ComponentReport {
        component_id: None,
        wall_curve_counts: BTreeMap::from([(WallTag::PWall, 1)]),
        expected_counts: BTreeMap::from([(WallTag::PWall, 1)]),
        connected: true,
        sample_count: 12,
        euler_characteristic: None,
        end_behavior: Some(true),
        matches_model: true,
        diagnostics: String::new(),
    };
    let text = artifact_string(&rep).unwrap();
    assert!(text.contains("\"schemaVersion\": 1"));
    assert_eq!(parse_artifact::<ComponentReport>(&text).unwrap(), rep);
}

#[test]
fn empty_stream_renders_axes() {
    let svg = render_records(&[], Projection::YPlane);
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tracks_round_trip_through_jsonl(tracks in prop::collection::vec(track(), 0..4)) {
        let text = write_jsonl(&tracks_to_records(&tracks)).unwrap();
        let back = tracks_from_records(&parse_jsonl(&text).unwrap()).unwrap();
        prop_assert_eq!(back, tracks);
    }

    #[test]
    fn curves_and_samples_round_trip(curves in prop::collection::vec(curve(), 0..3)) {
        let recs: Vec<Record> = curves
            .iter()
            .flat_map(|c| std::iter::once(Record::Curve(c.clone())).chain(c.samples.iter().cloned().map(Record::Sample)))
            .collect();
        let text = write_jsonl(&recs).unwrap();
        prop_assert_eq!(parse_jsonl(&text).unwrap(), recs.clone());
        // Serialization is a pure function of the value.
        prop_assert_eq!(write_jsonl(&parse_jsonl(&text).unwrap()).unwrap(), text);
    }

    #[test]
    fn config_round_trips(a in 1e-6..1.0f64, c in -10.0..0.0f64, seed in any::<u64>(), step in 1e-8..1e-4f64) {
        let mut cfg = RunConfig::default();
        cfg.parameter.a_re = a;
        cfg.parameter.c_re = c;
        cfg.seed = seed;
        cfg.motion.max_param_step = step;
        prop_assert_eq!(RunConfig::parse(&cfg.to_json().unwrap()).unwrap(), cfg);
    }
}
