/// Neumaier-compensated sum.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for x in terms {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            carry += (sum - t) + x;
        } else {
            carry += (x - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> crate::Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(crate::Error::InvalidParameter { name, value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancelled_terms() {
        let terms = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(terms), 2.0);
        assert_eq!(terms.iter().sum::<f64>(), 0.0);
    }
}
