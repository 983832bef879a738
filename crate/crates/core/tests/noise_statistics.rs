use dpnash_core::noise::{laplace_cdf, NoiseStream};

#[test]
fn laplace_moments_and_ks() {
    const N: usize = 1_000_000;
    let mut stream = NoiseStream::new(2024, 0);
    let mut draws: Vec<f64> = (0..N)
        .map(|_| stream.sample_laplace(1.0).unwrap())
        .collect();

    let mean = draws.iter().sum::<f64>() / N as f64;
    let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (N - 1) as f64;
    assert!(mean.abs() < 0.01, "mean {mean}");
    assert!((var - 2.0).abs() < 0.05, "variance {var}");

    draws.sort_by(f64::total_cmp);
    let ks = draws
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let f = laplace_cdf(x, 1.0);
            (f - k as f64 / N as f64).max((k + 1) as f64 / N as f64 - f)
        })
        .fold(0.0, f64::max);
    let critical = 1.628 / (N as f64).sqrt();
    assert!(ks < critical, "KS statistic {ks} vs {critical}");
}

#[test]
fn scale_multiplies_spread() {
    let mut stream = NoiseStream::new(5, 2);
    let n = 200_000;
    let mean_abs = (0..n)
        .map(|_| stream.sample_laplace(3.0).unwrap().abs())
        .sum::<f64>()
        / n as f64;
    // E|X| = b
    assert!((mean_abs - 3.0).abs() < 0.05, "{mean_abs}");
}
