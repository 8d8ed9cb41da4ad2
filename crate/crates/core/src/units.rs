//! Decibel conversions.

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm) * 1e-3
}

pub fn watts_to_dbm(w: f64) -> f64 {
    linear_to_db(w * 1e3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions() {
        assert_eq!(dbm_to_watts(30.0), 1.0);
        assert!((dbm_to_watts(20.0) - 0.1).abs() < 1e-15);
        assert!((watts_to_dbm(0.05) - 16.9897).abs() < 1e-4);
        assert!((linear_to_db(db_to_linear(-7.3)) + 7.3).abs() < 1e-12);
    }
}
