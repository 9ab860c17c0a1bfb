use otexplore_core::density::{random_walk_step_samples, sample_mixture, GaussianMixture};
use otexplore_core::rng::{stream, Stream};
use otexplore_core::Point2;

fn four_blobs() -> GaussianMixture {
    GaussianMixture::new([
        (0.25, Point2::new(300.0, 1200.0), [8000.0, 0.0, 0.0, 4800.0]),
        (0.25, Point2::new(1000.0, 900.0), [3200.0, 0.0, 0.0, 4800.0]),
        (0.25, Point2::new(700.0, 300.0), [6000.0, 0.0, 0.0, 4800.0]),
        (0.25, Point2::new(1500.0, 1000.0), [1500.0, 0.0, 0.0, 5000.0]),
    ])
    .unwrap()
}

#[test]
fn component_shares_within_three_percent() {
    for seed in 0..5 {
        let labelled = four_blobs().sample_labelled(2000, &mut stream(seed, Stream::Sampling));
        let mut counts = [0usize; 4];
        for (c, _) in &labelled {
            counts[*c] += 1;
        }
        for c in counts {
            let share = c as f64 / 2000.0;
            assert!((share - 0.25).abs() <= 0.03, "seed {seed}: share {share}");
        }
    }
}

#[test]
fn per_component_moments() {
    let mix = four_blobs();
    let labelled = mix.sample_labelled(20_000, &mut stream(3, Stream::Sampling));
    for (i, comp) in mix.components().iter().enumerate() {
        let pts: Vec<Point2> = labelled.iter().filter(|(c, _)| *c == i).map(|(_, p)| *p).collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.x).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.y).sum::<f64>() / n;
        let vx = pts.iter().map(|p| (p.x - mx).powi(2)).sum::<f64>() / (n - 1.0);
        let vy = pts.iter().map(|p| (p.y - my).powi(2)).sum::<f64>() / (n - 1.0);
        let cxy = pts.iter().map(|p| (p.x - mx) * (p.y - my)).sum::<f64>() / (n - 1.0);
        let (sx, sy) = (comp.covariance[0], comp.covariance[3]);
        assert!((mx - comp.mean.x).abs() < 4.0 * (sx / n).sqrt());
        assert!((my - comp.mean.y).abs() < 4.0 * (sy / n).sqrt());
        // Sample variance has relative standard error about sqrt(2/n).
        assert!((vx / sx - 1.0).abs() < 4.0 * (2.0 / n).sqrt(), "var x {vx} vs {sx}");
        assert!((vy / sy - 1.0).abs() < 4.0 * (2.0 / n).sqrt(), "var y {vy} vs {sy}");
        assert!(cxy.abs() < 4.0 * (sx * sy / n).sqrt());
    }
}

#[test]
fn correlated_component_reproduces_covariance() {
    let cov = [400.0, 240.0, 240.0, 900.0];
    let mix = GaussianMixture::new([(1.0, Point2::new(5.0, -5.0), cov)]).unwrap();
    let pts = mix.sample_points(40_000, &mut stream(8, Stream::Sampling));
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.x).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.y).sum::<f64>() / n;
    let cxy = pts.iter().map(|p| (p.x - mx) * (p.y - my)).sum::<f64>() / (n - 1.0);
    assert!((cxy - 240.0).abs() < 4.0 * ((400.0 * 900.0 + 240.0f64.powi(2)) / n).sqrt());
}

#[test]
fn walk_spreads_like_uniform_steps() {
    let mix = GaussianMixture::new([(1.0, Point2::ORIGIN, [0.0; 4])]).unwrap();
    let mut ens = sample_mixture(&mix, 5000, &mut stream(1, Stream::Sampling)).unwrap();
    let mut rng = stream(1, Stream::SampleWalk);
    let (v, steps) = (3.0, 25);
    for _ in 0..steps {
        random_walk_step_samples(&mut ens, v, &mut rng);
    }
    assert_eq!(ens.epoch, steps);
    // Each axis is a sum of `steps` independent U[-v, v] draws: variance v^2/3 each.
    let n = ens.points.len() as f64;
    let var = ens.points.iter().map(|p| p.x * p.x).sum::<f64>() / n;
    let want = steps as f64 * v * v / 3.0;
    assert!((var / want - 1.0).abs() < 0.08, "{var} vs {want}");
    assert!(ens.points.iter().all(|p| p.x.abs() <= v * steps as f64 && p.y.abs() <= v * steps as f64));
    assert!(ens.weights.iter().all(|w| *w == 1.0 / 5000.0));
}
