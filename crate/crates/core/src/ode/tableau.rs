//! Butcher tableaus of the embedded pairs.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DenseKind {
    Dopri,
    Hermite,
}

pub struct Tableau {
    pub name: &'static str,
    pub c: &'static [f64],
    pub a: &'static [&'static [f64]],
    /// Propagating weights (fifth order).
    pub b: &'static [f64],
    /// Embedded weights (fourth order).
    pub bhat: &'static [f64],
    pub fsal: bool,
    pub dense: DenseKind,
}

pub static DOPRI5: Tableau = Tableau {
    name: "dopri5",
    c: &[0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0],
    a: &[
        &[],
        &[1.0 / 5.0],
        &[3.0 / 40.0, 9.0 / 40.0],
        &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
        &[
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
        ],
        &[
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
        ],
        &[
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ],
    b: &[
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ],
    bhat: &[
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ],
    fsal: true,
    dense: DenseKind::Dopri,
};

/// Dense-output weights of the Dormand-Prince continuous extension.
pub static DOPRI5_D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

pub static CASH_KARP: Tableau = Tableau {
    name: "cash-karp",
    c: &[0.0, 1.0 / 5.0, 3.0 / 10.0, 3.0 / 5.0, 1.0, 7.0 / 8.0],
    a: &[
        &[],
        &[1.0 / 5.0],
        &[3.0 / 40.0, 9.0 / 40.0],
        &[3.0 / 10.0, -9.0 / 10.0, 6.0 / 5.0],
        &[-11.0 / 54.0, 5.0 / 2.0, -70.0 / 27.0, 35.0 / 27.0],
        &[
            1631.0 / 55296.0,
            175.0 / 512.0,
            575.0 / 13824.0,
            44275.0 / 110592.0,
            253.0 / 4096.0,
        ],
    ],
    b: &[
        37.0 / 378.0,
        0.0,
        250.0 / 621.0,
        125.0 / 594.0,
        0.0,
        512.0 / 1771.0,
    ],
    bhat: &[
        2825.0 / 27648.0,
        0.0,
        18575.0 / 48384.0,
        13525.0 / 55296.0,
        277.0 / 14336.0,
        1.0 / 4.0,
    ],
    fsal: false,
    dense: DenseKind::Hermite,
};

pub static RKF45: Tableau = Tableau {
    name: "rkf45",
    c: &[0.0, 1.0 / 4.0, 3.0 / 8.0, 12.0 / 13.0, 1.0, 1.0 / 2.0],
    a: &[
        &[],
        &[1.0 / 4.0],
        &[3.0 / 32.0, 9.0 / 32.0],
        &[1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0],
        &[439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0],
        &[
            -8.0 / 27.0,
            2.0,
            -3544.0 / 2565.0,
            1859.0 / 4104.0,
            -11.0 / 40.0,
        ],
    ],
    b: &[
        16.0 / 135.0,
        0.0,
        6656.0 / 12825.0,
        28561.0 / 56430.0,
        -9.0 / 50.0,
        2.0 / 55.0,
    ],
    bhat: &[
        25.0 / 216.0,
        0.0,
        1408.0 / 2565.0,
        2197.0 / 4104.0,
        -1.0 / 5.0,
        0.0,
    ],
    fsal: false,
    dense: DenseKind::Hermite,
};

#[cfg(test)]
mod tests {
    use super::*;

    fn check(t: &Tableau) {
        let sb: f64 = t.b.iter().sum();
        let sh: f64 = t.bhat.iter().sum();
        assert!((sb - 1.0).abs() < 1e-15, "{}", t.name);
        assert!((sh - 1.0).abs() < 1e-15, "{}", t.name);
        for (i, row) in t.a.iter().enumerate() {
            let s: f64 = row.iter().sum();
            assert!((s - t.c[i]).abs() < 1e-14, "{} row {i}", t.name);
        }
        // third-order condition sum b c^2 = 1/3
        let s: f64 = t.b.iter().zip(t.c).map(|(b, c)| b * c * c).sum();
        assert!((s - 1.0 / 3.0).abs() < 1e-14, "{}", t.name);
    }

    #[test]
    fn row_sums_and_order_conditions() {
        check(&DOPRI5);
        check(&CASH_KARP);
        check(&RKF45);
    }
}
