use oppmac::model::{sample_deployment, Duplex, SystemParams};

#[test]
fn node_count_follows_poisson_pairs() {
    let params = SystemParams::new(0.001, 4.0, 1.0, 2.0, 0.0, Duplex::Full).unwrap();
    let n = 10_000;
    let counts: Vec<f64> = (0..n)
        .map(|seed| sample_deployment(&params, 1000.0, 7 + seed).unwrap().len() as f64)
        .collect();
    let mean = counts.iter().sum::<f64>() / n as f64;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64;

    assert!((mean - 2000.0).abs() <= 3.0 * 2000f64.sqrt(), "mean {mean}");
    // nodes come in pairs, so the count is twice a Poisson(1000) variable
    let se = (4000.0 / n as f64).sqrt();
    assert!((mean - 2000.0).abs() <= 4.0 * se, "mean {mean}, se {se}");
    assert!((var / 4000.0 - 1.0).abs() < 0.06, "variance {var}");
    assert!(counts.iter().all(|&c| (c as u64).is_multiple_of(2)));
}

#[test]
fn positions_cover_the_window_uniformly() {
    let params = SystemParams::new(0.001, 4.0, 1.0, 2.0, 0.0, Duplex::Full).unwrap();
    let dep = sample_deployment(&params, 1000.0, 11).unwrap();
    let mut quadrants = [0usize; 4];
    for node in &dep.nodes {
        assert!((0.0..1000.0).contains(&node.position.x) && (0.0..1000.0).contains(&node.position.y));
        let q = (node.position.x >= 500.0) as usize + 2 * (node.position.y >= 500.0) as usize;
        quadrants[q] += 1;
    }
    let expected = dep.len() as f64 / 4.0;
    for q in quadrants {
        // pairs straddling a boundary make the counts slightly over-dispersed
        assert!((q as f64 - expected).abs() < 5.0 * (2.0 * expected).sqrt(), "{quadrants:?}");
    }
}
