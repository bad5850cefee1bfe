use ranlat::stochastic::{DistSpec, LatencyDistribution};
use ranlat::traffic::{
    export_results, generate_trace, load_trace, parse_trace, save_trace, ExportFormat, PacketSize,
};
use ranlat::{Component, Error, LatencyBreakdown, TrafficSpec};

#[test]
fn constant_arrivals() {
    let t = generate_trace(&TrafficSpec::constant(101.0, 64, 3)).unwrap();
    let arrivals: Vec<f64> = t.packets.iter().map(|p| p.arrival_ms).collect();
    assert_eq!(arrivals, vec![101.0, 202.0, 303.0]);
    assert!(t.packets.iter().all(|p| p.size_bytes == 64));
    assert!(generate_trace(&TrafficSpec::constant(101.0, 64, 0)).unwrap().is_empty());
}

#[test]
fn gaussian_mean() {
    let spec = TrafficSpec::parse("gaussian:105,0.05@64x10000", 7).unwrap();
    let t = generate_trace(&spec).unwrap();
    assert_eq!(t.len(), 10_000);
    let gaps: Vec<f64> = std::iter::once(t.packets[0].arrival_ms)
        .chain(t.packets.windows(2).map(|w| w[1].arrival_ms - w[0].arrival_ms))
        .collect();
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    assert!((mean - 105.0).abs() < 0.01, "{mean}");
    assert!(t.packets.windows(2).all(|w| w[0].arrival_ms < w[1].arrival_ms));
    assert_eq!(generate_trace(&spec).unwrap(), t);
}

#[test]
fn poisson_and_random_sizes() {
    let mut spec = TrafficSpec::parse("poisson:2@64x5000", 3).unwrap();
    spec.packet_size = PacketSize::Random(DistSpec::gaussian(500.0, 100.0));
    let t = generate_trace(&spec).unwrap();
    let mean_gap = t.packets.last().unwrap().arrival_ms / 5000.0;
    assert!((mean_gap - 2.0).abs() < 0.1, "{mean_gap}");
    assert!(t.packets.iter().all(|p| p.size_bytes >= 1));
    assert!(t.is_sorted());
}

#[test]
fn save_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (i, spec) in [
        TrafficSpec::constant(101.0, 64, 3),
        TrafficSpec::parse("gaussian:105,0.05@64x100", 1).unwrap(),
        TrafficSpec::parse("poisson:3.3@1500x100", 2).unwrap(),
    ]
    .iter()
    .enumerate()
    {
        let t = generate_trace(spec).unwrap();
        let path = dir.path().join(format!("t{i}.csv"));
        save_trace(&t, &path).unwrap();
        assert_eq!(load_trace(&path).unwrap(), t);
    }
}

#[test]
fn trace_parse_errors() {
    assert!(parse_trace("1.0,64\r\n2.0,64\r\n").is_ok());
    match parse_trace("1.0,64\n-2.0,64\n") {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
    assert!(matches!(parse_trace("1.0,64\nabc\n"), Err(Error::Parse { line: 2, .. })));
    assert!(parse_trace("1.0,0\n").is_err());
    assert!(parse_trace("2.0,1\n1.0,1\n").is_err());
    assert!(load_trace(std::path::Path::new("/nonexistent/trace.csv")).is_err());
}

#[test]
fn export_formats() {
    let dist = LatencyDistribution::new(vec![2.0, 1.0, 1.0, 4.5]).unwrap();
    let b: Vec<LatencyBreakdown> = dist
        .samples()
        .iter()
        .map(|&x| {
            let mut b = LatencyBreakdown::default().with(Component::W1, x - 0.4).with(Component::W7, 0.4);
            b.total = x;
            b
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();

    let p = dir.path().join("samples.csv");
    export_results(&dist, &b, &p, "samples-table".parse().unwrap()).unwrap();
    let text = std::fs::read_to_string(&p).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,latency_ms,w1,w7"));
    let back: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(back, dist.samples());

    let p = dir.path().join("cdf.csv");
    export_results(&dist, &b, &p, ExportFormat::CdfTable).unwrap();
    let text = std::fs::read_to_string(&p).unwrap();
    assert_eq!(text, "latency_ms,cumulative_fraction\n1,0.5\n2,0.75\n4.5,1\n");

    let p = dir.path().join("summary.csv");
    export_results(&dist, &b, &p, ExportFormat::Summary).unwrap();
    let text = std::fs::read_to_string(&p).unwrap();
    let get = |k: &str| -> f64 {
        text.lines()
            .find_map(|l| l.strip_prefix(&format!("{k},")))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert_eq!(get("count"), 4.0);
    assert_eq!(get("min"), 1.0);
    assert_eq!(get("max"), 4.5);
    assert_eq!(get("mean"), 2.125);
    assert_eq!(get("p50"), 1.0);
    assert_eq!(get("p99.99"), 4.5);
    assert!("bogus".parse::<ExportFormat>().is_err());
}
