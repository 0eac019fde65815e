use std::path::Path;

use bpinn::experiments::BUNDLED_DATA;
use bpinn::timeseries::{load_cumulative_csv, moving_average, normalize, split, DAYS, SCALE};

#[test]
fn bundled_snapshot_anchors() {
    let raw = load_cumulative_csv(Path::new(BUNDLED_DATA)).unwrap();
    assert_eq!(raw.values.len(), 365);
    assert_eq!(raw.dates[0].to_string(), "2021-01-01");
    assert_eq!(raw.values[0], 572_602.0);
    assert_eq!(raw.argmax(), Some((118, 905_378.0)));
    assert_eq!(raw.argmin(), Some((46, 281_223.0)));

    let n = normalize(&raw);
    assert_eq!(n.max(), 905_378.0 / SCALE);
    assert_eq!(n.t[1], 1.0 / DAYS);
    assert!(n.t.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn smoothed_series_has_three_waves() {
    let raw = load_cumulative_csv(Path::new(BUNDLED_DATA)).unwrap();
    let s = moving_average(&raw, 7).unwrap();
    // local maxima that dominate a ±30 day neighbourhood
    let v = &s.values;
    let peaks: Vec<usize> = (0..v.len())
        .filter(|&i| {
            let lo = i.saturating_sub(30);
            let hi = (i + 31).min(v.len());
            (lo..hi).all(|j| v[j] <= v[i]) && i > 0 && i + 1 < v.len()
        })
        .collect();
    assert_eq!(peaks.len(), 3, "{peaks:?}");
    // winter, spring and late-summer waves
    assert!(peaks[0] < 31 && (90..150).contains(&peaks[1]) && peaks[2] > 180, "{peaks:?}");
}

#[test]
fn split_windows_cover_the_year() {
    let n = normalize(&load_cumulative_csv(Path::new(BUNDLED_DATA)).unwrap());
    for k in [150, 225, 300] {
        let sp = split(&n, k).unwrap();
        assert_eq!(sp.train.len(), k);
        assert_eq!(sp.test.len(), 365 - k);
        assert_eq!(sp.test.t[0], k as f64 / DAYS);
    }
}
