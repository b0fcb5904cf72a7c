//! Periodized orthogonal DWT of periodic parameter vectors.
//!
//! Coefficients are ordered `[V_J; W_1 (coarsest); ...; W_J (finest)]`. A
//! vector whose length is not a power of two is extended periodically first.

use std::collections::HashMap;
use std::fmt;
use std::f64::consts::FRAC_1_SQRT_2;
use std::str::FromStr;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{Family, FitResult};
use crate::significance::{self, Basis, Reduction, TransformCoefs};

pub use crate::significance::TransformCoefs as WaveletCoefs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WaveletFamily {
    /// Extremal phase with the given number of vanishing moments; `D(1)` is Haar.
    Daubechies(u8),
    /// Least asymmetric with the given number of vanishing moments.
    LeastAsymmetric(u8),
}

impl WaveletFamily {
    pub const HAAR: WaveletFamily = WaveletFamily::Daubechies(1);

    pub fn new_daubechies(x: u8) -> Result<Self> {
        if (1..=10).contains(&x) {
            Ok(Self::Daubechies(x))
        } else {
            Err(Error::UnsupportedWavelet(format!("D({x}); supported orders are 1..=10")))
        }
    }

    pub fn new_least_asymmetric(x: u8) -> Result<Self> {
        if (4..=10).contains(&x) {
            Ok(Self::LeastAsymmetric(x))
        } else {
            Err(Error::UnsupportedWavelet(format!("LA({x}); supported orders are 4..=10")))
        }
    }

    /// Every supported family.
    pub fn all() -> Vec<WaveletFamily> {
        (1..=10)
            .map(WaveletFamily::Daubechies)
            .chain((4..=10).map(WaveletFamily::LeastAsymmetric))
            .collect()
    }

    /// Scaling filter `h`, of length twice the number of vanishing moments.
    pub fn filter(self) -> Result<&'static [f64]> {
        match self {
            WaveletFamily::Daubechies(x @ 1..=10) => Ok(D_FILTERS[x as usize - 1]),
            WaveletFamily::LeastAsymmetric(x @ 4..=10) => Ok(LA_FILTERS[x as usize - 4]),
            other => Err(Error::UnsupportedWavelet(other.to_string())),
        }
    }
}

impl fmt::Display for WaveletFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WaveletFamily::Daubechies(x) => write!(f, "D({x})"),
            WaveletFamily::LeastAsymmetric(x) => write!(f, "LA({x})"),
        }
    }
}

impl FromStr for WaveletFamily {
    type Err = Error;

    /// Accepts `haar`, `D5`, `D(5)`, `LA8`, `la(8)`.
    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.trim().to_ascii_uppercase().chars().filter(|c| !"() ".contains(*c)).collect();
        if t == "HAAR" {
            return Ok(Self::HAAR);
        }
        let bad = || Error::UnsupportedWavelet(format!("`{s}`"));
        if let Some(rest) = t.strip_prefix("LA") {
            return Self::new_least_asymmetric(rest.parse().map_err(|_| bad())?);
        }
        if let Some(rest) = t.strip_prefix('D') {
            return Self::new_daubechies(rest.parse().map_err(|_| bad())?);
        }
        Err(bad())
    }
}

/// One analysis step on a length-`n` block: `(approximation, detail)`.
fn step(h: &[f64], x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let half = n / 2;
    let mut c = vec![0.0; half];
    let mut d = vec![0.0; half];
    for k in 0..half {
        for (m, &hm) in h.iter().enumerate() {
            c[k] += hm * x[(m + 2 * k) % n];
            let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
            d[k] += sign * hm * x[(2 * k + 1 + n * h.len() - m) % n];
        }
    }
    (c, d)
}

fn pyramid(h: &[f64], x: &[f64]) -> Vec<f64> {
    let mut details: Vec<Vec<f64>> = Vec::new();
    let mut c = x.to_vec();
    while c.len() > 1 {
        let (a, d) = step(h, &c);
        details.push(d);
        c = a;
    }
    let mut out = c;
    for d in details.into_iter().rev() {
        out.extend(d);
    }
    out
}

fn check_length(m: usize) -> Result<()> {
    if m < 2 || !m.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("length {m} is not a power of two >= 2")));
    }
    Ok(())
}

/// The `M x M` DWT matrix, cached per `(family, M)`.
pub fn transform_matrix(family: WaveletFamily, m: usize) -> Result<Arc<DMatrix<f64>>> {
    check_length(m)?;
    let h = family.filter()?;
    static CACHE: OnceLock<RwLock<HashMap<(WaveletFamily, usize), Arc<DMatrix<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(w) = cache.read().expect("wavelet cache poisoned").get(&(family, m)) {
        return Ok(w.clone());
    }
    let mut w = DMatrix::zeros(m, m);
    let mut e = vec![0.0; m];
    for j in 0..m {
        e[j] = 1.0;
        for (i, v) in pyramid(h, &e).into_iter().enumerate() {
            w[(i, j)] = v;
        }
        e[j] = 0.0;
    }
    let w = Arc::new(w);
    cache
        .write()
        .expect("wavelet cache poisoned")
        .entry((family, m))
        .or_insert_with(|| w.clone());
    Ok(w)
}

pub fn dwt(x: &[f64], family: WaveletFamily) -> Result<Vec<f64>> {
    check_length(x.len())?;
    Ok(pyramid(family.filter()?, x))
}

pub fn idwt(w: &[f64], family: WaveletFamily) -> Result<Vec<f64>> {
    let m = transform_matrix(family, w.len())?;
    Ok((m.transpose() * DVector::from_column_slice(w)).as_slice().to_vec())
}

/// Smallest power of two `>= max(nu, 2)`.
pub fn extended_length(nu: usize) -> usize {
    nu.max(2).next_power_of_two()
}

/// Wraps `x` and `gamma` periodically to the next power-of-two length.
pub fn periodic_extend(x: &[f64], gamma: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let nu = x.len();
    if nu == 0 {
        return Err(Error::InvalidArgument("empty vector".into()));
    }
    if gamma.nrows() != nu || gamma.ncols() != nu {
        return Err(Error::InvalidArgument("covariance does not match the vector length".into()));
    }
    let m = extended_length(nu);
    let xe = (0..m).map(|i| x[i % nu]).collect();
    let ge = DMatrix::from_fn(m, m, |i, j| gamma[(i % nu, j % nu)]);
    Ok((xe, ge))
}

/// `R = W Gamma W'`.
pub fn propagate_covariance(gamma_ext: &DMatrix<f64>, family: WaveletFamily) -> Result<DMatrix<f64>> {
    if gamma_ext.nrows() != gamma_ext.ncols() {
        return Err(Error::InvalidArgument("covariance must be square".into()));
    }
    let w = transform_matrix(family, gamma_ext.nrows())?;
    let mut r = &*w * gamma_ext * w.transpose();
    for i in 0..r.nrows() {
        for j in 0..i {
            let v = 0.5 * (r[(i, j)] + r[(j, i)]);
            r[(i, j)] = v;
            r[(j, i)] = v;
        }
    }
    Ok(r)
}

/// Tests `M - 1` detail coefficients.
pub fn significance_mask(w_hat: &[f64], r: &DMatrix<f64>, n: usize, alpha: f64) -> Result<Vec<bool>> {
    significance::significance_mask(w_hat, r, n, alpha)
}

struct WaveletBasis(WaveletFamily);

impl Basis for WaveletBasis {
    fn forward(&self, x: &[f64], gamma: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let (xe, ge) = periodic_extend(x, gamma)?;
        Ok((dwt(&xe, self.0)?, propagate_covariance(&ge, self.0)?))
    }

    fn inverse(&self, coefs: &[f64], nu: usize) -> Result<Vec<f64>> {
        let mut x = idwt(coefs, self.0)?;
        x.truncate(nu);
        Ok(x)
    }
}

/// Wavelet coefficients, covariance and test result for one family.
pub fn test_family(
    wavelet: WaveletFamily,
    family: Family,
    x: &[f64],
    gamma: &DMatrix<f64>,
    n: usize,
    alpha: f64,
) -> Result<TransformCoefs> {
    significance::test_family(&WaveletBasis(wavelet), family, x, gamma, n, alpha)
}

/// Reconstructs `nu` parameters from (masked) wavelet coefficients.
pub fn reconstruct(coefs: &[f64], nu: usize, wavelet: WaveletFamily) -> Result<Vec<f64>> {
    WaveletBasis(wavelet).inverse(coefs, nu)
}

/// Wavelet-reduced model: every family keeps only its significant coefficients.
pub fn reduce_model(fit: &FitResult, wavelet: WaveletFamily, alpha: f64) -> Result<Reduction> {
    wavelet.filter()?;
    significance::reduce(&WaveletBasis(wavelet), fit, alpha)
}

const D_FILTERS: [&[f64]; 10] = [
    &[FRAC_1_SQRT_2, FRAC_1_SQRT_2],
    &[0.48296291314453416, 0.8365163037378079, 0.2241438680420134, -0.12940952255126037],
    &[
        0.33267055295008263, 0.8068915093110925, 0.45987750211849154, -0.13501102001025458, -0.08544127388202666,
        0.03522629188570953,
    ],
    &[
        0.2303778133088965, 0.7148465705529157, 0.6308807679298589, -0.027983769416859854, -0.18703481171909309,
        0.030841381835560764, 0.0328830116668852, -0.010597401785069032,
    ],
    &[
        0.16010239797419293, 0.6038292697971896, 0.7243085284377729, 0.13842814590132074, -0.24229488706638203,
        -0.032244869584638375, 0.07757149384004572, -0.006241490212798274, -0.012580751999081999,
        0.0033357252854737712,
    ],
    &[
        0.11154074335010947, 0.49462389039845306, 0.7511339080210954, 0.31525035170919763, -0.22626469396543983,
        -0.12976686756726194, 0.09750160558732304, 0.027522865530305727, -0.03158203931748603,
        0.0005538422011614961, 0.004777257510945511, -0.0010773010853084796,
    ],
    &[
        0.07785205408500918, 0.3965393194819173, 0.7291320908462351, 0.4697822874051931, -0.14390600392856498,
        -0.22403618499387498, 0.07130921926683026, 0.08061260915108308, -0.03802993693501441,
        -0.01657454163066688, 0.01255099855609984, 0.0004295779729213665, -0.0018016407040474908,
        0.00035371379997452024,
    ],
    &[
        0.05441584224310401, 0.31287159091429995, 0.6756307362972898, 0.5853546836542067, -0.015829105256349306,
        -0.2840155429615469, 0.0004724845739132828, 0.12874742662047847, -0.017369301001807547,
        -0.044088253930794755, 0.013981027917398282, 0.008746094047405777, -0.004870352993451574,
        -0.00039174037337694705, 0.0006754494064505693, -0.00011747678412476953,
    ],
    &[
        0.038077947363878345, 0.24383467461259034, 0.6048231236901112, 0.6572880780513005, 0.13319738582500756,
        -0.2932737832791749, -0.09684078322297646, 0.14854074933810638, 0.03072568147933338,
        -0.06763282906132997, 0.00025094711483145197, 0.022361662123679096, -0.004723204757751397,
        -0.00428150368246343, 0.0018476468830562265, 0.00023038576352319597, -0.0002519631889427101,
        3.93473203162716e-05,
    ],
    &[
        0.026670057900555554, 0.1881768000776915, 0.5272011889317256, 0.6884590394536035, 0.2811723436605775,
        -0.24984642432731538, -0.19594627437737705, 0.12736934033579325, 0.09305736460357235,
        -0.07139414716639708, -0.029457536821875813, 0.033212674059341, 0.0036065535669561697,
        -0.010733175483330575, 0.001395351747052901, 0.001992405295185056, -0.0006858566949597116,
        -0.00011646685512928545, 9.358867032006959e-05, -1.3264202894521244e-05,
    ],
];

const LA_FILTERS: [&[f64]; 7] = [
    &[
        -0.07576571478950221, -0.029635527646002493, 0.497618667632775, 0.8037387518051321, 0.29785779560530606,
        -0.09921954357663353, -0.012603967262031304, 0.032223100604051466,
    ],
    &[
        0.027333068344998768, 0.02951949092570626, -0.039134249302313844, 0.19939753397685558, 0.7234076904040407,
        0.633978963456792, 0.01660210576451085, -0.17532808990805623, -0.021101834024689042, 0.019538882735249827,
    ],
    &[
        0.015404109327044824, 0.0034907120842221626, -0.11799011114852002, -0.04831174258569806,
        0.49105594192797375, 0.787641141028651, 0.3379294217281658, -0.07263752278637658, -0.02106029251237085,
        0.04472490177078139, 0.0017677118642540077, -0.00780070832503238,
    ],
    &[
        0.002681814568260147, -0.001047384888679738, -0.012636303403240567, 0.030515513165877885,
        0.06789269350122057, -0.04955283493704283, 0.017441255086835708, 0.5361019170905692, 0.7677643170048829,
        0.2886296317506479, -0.14004724044293365, -0.10780823770328972, 0.0040102448715223955, 0.010268176708464817,
    ],
    &[
        -0.0033824159510050028, -0.0005421323318000107, 0.03169508781152599, 0.007607487324976609,
        -0.14329423835127267, -0.061273359067811076, 0.4813596512590534, 0.777185751699628, 0.36444189483617895,
        -0.0519458381078818, -0.027219029917103486, 0.04913717967373029, 0.0038087520138944896,
        -0.014952258337062199, -0.0003029205147241331, 0.001889950332767689,
    ],
    &[
        0.0014009155259146562, 0.0006197808889855071, -0.013271967781817134, -0.011528210207679187,
        0.030224878858275187, 0.0005834627461249819, -0.05456895843083335, 0.23876091460730517, 0.7178970827644124,
        0.6173384491409342, 0.03527248803527104, -0.19155083129728434, -0.018233770779395506, 0.062077789302885746,
        0.008859267493400267, -0.010264064027633121, -0.00047315449868004354, 0.001069490032908612,
    ],
    &[
        0.0007701598091144599, 9.563267072285273e-05, -0.00864129927702215, -0.0014653825813046104,
        0.04592723923109151, 0.011609893903711319, -0.1594942788849106, -0.07088053578323157, 0.4716906669384429,
        0.7695100370210979, 0.3838267610670763, -0.035536740473819585, -0.03199005688242811, 0.049994972077375154,
        0.00576491203358115, -0.02035493981231111, -0.0008043589320164513, 0.004593173585311792,
        5.703608361849501e-05, -0.00045932942100465206,
    ],
];

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const HAAR8: [[f64; 8]; 8] = [
        [0.35; 8],
        [0.35, 0.35, 0.35, 0.35, -0.35, -0.35, -0.35, -0.35],
        [0.5, 0.5, -0.5, -0.5, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.5, 0.5, -0.5, -0.5],
        [0.71, -0.71, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.71, -0.71, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.71, -0.71, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.71, -0.71],
    ];

    #[test]
    fn filters_are_orthonormal() {
        for fam in WaveletFamily::all() {
            let h = fam.filter().unwrap();
            let s: f64 = h.iter().sum();
            let s2: f64 = h.iter().map(|v| v * v).sum();
            assert!((s - 2f64.sqrt()).abs() < 1e-12, "{fam}");
            assert!((s2 - 1.0).abs() < 1e-12, "{fam}");
            for shift in (2..h.len()).step_by(2) {
                let dot: f64 = (0..h.len() - shift).map(|i| h[i] * h[i + shift]).sum();
                assert!(dot.abs() < 1e-12, "{fam} shift {shift}");
            }
        }
    }

    #[test]
    fn haar_golden() {
        let w = transform_matrix(WaveletFamily::HAAR, 8).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                assert!((w[(i, j)] - HAAR8[i][j]).abs() <= 0.005 + 1e-3, "{i},{j}");
            }
        }
    }

    #[test]
    fn orthogonal_for_all_families() {
        for fam in WaveletFamily::all() {
            for m in [2, 4, 8, 16] {
                let w = transform_matrix(fam, m).unwrap();
                let e = (&*w * w.transpose() - DMatrix::identity(m, m)).abs().max();
                assert!(e < 1e-10, "{fam} M={m}: {e}");
                let r0 = 1.0 / (m as f64).sqrt();
                assert!(w.row(0).iter().all(|v| (v - r0).abs() < 1e-12));
            }
        }
    }

    #[test]
    fn haar_examples() {
        let w = dwt(&[1.0; 8], WaveletFamily::HAAR).unwrap();
        assert!((w[0] - 8f64.sqrt()).abs() < 1e-12 && w[1..].iter().all(|v| v.abs() < 1e-12));
        let x: Vec<f64> = (1..=8).map(f64::from).collect();
        let w = dwt(&x, WaveletFamily::HAAR).unwrap();
        let h = 0.5f64.sqrt();
        let want = [36.0 / 8f64.sqrt(), -16.0 / 8f64.sqrt(), -2.0, -2.0, -h, -h, -h, -h];
        for (a, b) in w.iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "{w:?}");
        }
    }

    #[test]
    fn haar_locality() {
        let base = [0.3, 1.0, -2.0, 0.5, 0.7, 0.1, 0.0, 1.2];
        let mut bumped = base;
        bumped[0] += 1.0;
        let a = dwt(&base, WaveletFamily::HAAR).unwrap();
        let b = dwt(&bumped, WaveletFamily::HAAR).unwrap();
        let changed: Vec<usize> = (0..8).filter(|&i| (a[i] - b[i]).abs() > 1e-15).collect();
        assert_eq!(changed, vec![0, 1, 2, 4]);
    }

    #[test]
    fn extension() {
        let g = DMatrix::from_fn(7, 7, |i, j| (i + j) as f64);
        let (x, ge) = periodic_extend(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0], &g).unwrap();
        assert_eq!(x, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 0.0]);
        assert_eq!(ge[(7, 7)], 0.0);
        assert_eq!(ge[(7, 3)], 3.0);
        assert_eq!(ge, ge.transpose());
        let g8 = DMatrix::identity(8, 8);
        let (x8, ge8) = periodic_extend(&[1.0; 8], &g8).unwrap();
        assert_eq!(x8, vec![1.0; 8]);
        assert_eq!(ge8, g8);
    }

    #[test]
    fn level_only_reconstruction_is_mean() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0];
        let (xe, _) = periodic_extend(&x, &DMatrix::identity(7, 7)).unwrap();
        let mut w = dwt(&xe, WaveletFamily::Daubechies(5)).unwrap();
        for v in w.iter_mut().skip(1) {
            *v = 0.0;
        }
        let back = reconstruct(&w, 7, WaveletFamily::Daubechies(5)).unwrap();
        let mean = xe.iter().sum::<f64>() / 8.0;
        assert!(back.iter().all(|v| (v - mean).abs() < 1e-12));
    }

    #[test]
    fn parse_names() {
        assert_eq!("haar".parse::<WaveletFamily>().unwrap(), WaveletFamily::Daubechies(1));
        assert_eq!("D(8)".parse::<WaveletFamily>().unwrap(), WaveletFamily::Daubechies(8));
        assert_eq!("la5".parse::<WaveletFamily>().unwrap(), WaveletFamily::LeastAsymmetric(5));
        assert!(matches!("LA3".parse::<WaveletFamily>(), Err(Error::UnsupportedWavelet(_))));
        assert!(matches!("D11".parse::<WaveletFamily>(), Err(Error::UnsupportedWavelet(_))));
        assert!(matches!("sym4".parse::<WaveletFamily>(), Err(Error::UnsupportedWavelet(_))));
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(dwt(&[1.0; 6], WaveletFamily::HAAR).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_and_energy(x in prop::collection::vec(-4.0f64..4.0, 16), k in 0usize..17, short in any::<bool>()) {
            let fam = WaveletFamily::all()[k];
            let x = if short { x[..8].to_vec() } else { x };
            let w = dwt(&x, fam).unwrap();
            let back = idwt(&w, fam).unwrap();
            for (a, b) in x.iter().zip(&back) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            let e1: f64 = x.iter().map(|v| v * v).sum();
            let e2: f64 = w.iter().map(|v| v * v).sum();
            prop_assert!((e1 - e2).abs() < 1e-12 * (1.0 + e1));
        }

        #[test]
        fn propagation_preserves_trace(d in prop::collection::vec(0.01f64..3.0, 8), k in 0usize..17) {
            let fam = WaveletFamily::all()[k];
            let g = DMatrix::from_diagonal(&DVector::from_vec(d.clone()));
            let r = propagate_covariance(&g, fam).unwrap();
            prop_assert!((r.trace() - d.iter().sum::<f64>()).abs() < 1e-10);
            prop_assert_eq!(r.clone(), r.transpose());
        }
    }
}
