//! Naive reference implementation of the 55 pretext targets.

pub fn brute_labels(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut out = stats(x);
    for s in 0..10 {
        let start = s * n / 10;
        let end = (s + 1) * n / 10;
        let mut window = Vec::new();
        for i in start..end {
            window.push(x[i]);
        }
        out.extend(stats(&window));
    }
    out
}

fn stats(w: &[f64]) -> Vec<f64> {
    let n = w.len();
    let mut hi = w[0];
    let mut lo = w[0];
    let mut sum = 0.0;
    for &v in w {
        if v > hi {
            hi = v;
        }
        if v < lo {
            lo = v;
        }
        sum += v;
    }
    let mean = sum / n as f64;
    let mut sq = 0.0;
    for &v in w {
        sq += (v - mean) * (v - mean);
    }
    let std = (sq / n as f64).sqrt();

    let mut peaks = 0;
    let mut i = 1;
    while i + 1 < n {
        let (a, b, c) = (w[i - 1], w[i], w[i + 1]);
        if (b > a && b > c) || (b < a && b < c) {
            peaks += 1;
        }
        i += 1;
    }

    // median by selection: repeatedly pull out the smallest remaining value
    let mut rest = w.to_vec();
    let mut sorted = Vec::new();
    while !rest.is_empty() {
        let mut k = 0;
        for j in 1..rest.len() {
            if rest[j] < rest[k] {
                k = j;
            }
        }
        sorted.push(rest.remove(k));
    }
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };

    let mut crossings = 0;
    let mut last = 0i32;
    for &v in w {
        let sign = if v > median {
            1
        } else if v < median {
            -1
        } else {
            0
        };
        if sign == 0 {
            continue;
        }
        if last != 0 && sign != last {
            crossings += 1;
        }
        last = sign;
    }
    vec![hi, lo, std, peaks as f64 / n as f64, crossings as f64 / n as f64]
}
