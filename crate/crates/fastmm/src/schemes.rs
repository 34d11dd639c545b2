//! Registry of bundled bilinear schemes and loader for external ones.
//!
//! Coefficients are stored as text in the [`Coefficient`] grammar
//! (`p/q`, `sqrt3*p/q`, …) so that every entry is kept exactly as
//! published.  The accurate `⟨3,3,6;40⟩` scheme is shipped as three SMS
//! files under `data/`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::coeff::Coefficient;
use crate::error::{Error, Result};
use crate::hmrep::HMRep;
use crate::matrix::CoeffMatrix;
use crate::sms::parse_sms;

/// Identifier of a scheme known to the library.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SchemeId {
    /// The conventional `⟨m,k,n⟩` algorithm with `m·k·n` products.
    Conventional(usize, usize, usize),
    /// Strassen's 2×2 algorithm with 7 products.
    Strassen,
    /// Winograd's variant of Strassen's algorithm.
    Winograd,
    /// The γ₂-optimal 2×2 scheme with coefficients in ℚ(√3).
    AccurateSqrt3,
    /// Rational approximation of the accurate scheme by powers of two.
    Powers,
    /// Orthogonally rotated variant of [`SchemeId::Powers`].
    PowRot,
    /// Rational approximation with γ₂ ≈ 12.0695.
    Approx0695,
    /// Rational approximation with γ₂ ≈ 12.0661.
    Approx0661,
    /// Sparse `{0,±1}` core of the accurate scheme in an alternative basis
    /// (a bilinear map, not itself a matrix multiplication).
    AltBasisCore,
    /// The sparse core composed with its change of basis — equals the
    /// accurate scheme.
    AltBasisCoB,
    /// Accurate `⟨3,3,6;40⟩` scheme (rational coefficients).
    Smirnov336Accurate,
    /// Scheme read from three SMS files `(L, R, P)`.
    External { l: PathBuf, r: PathBuf, p: PathBuf },
}

impl SchemeId {
    /// Every bundled scheme (the conventional one at `⟨2,2,2⟩`).
    pub fn bundled() -> Vec<SchemeId> {
        vec![
            SchemeId::Conventional(2, 2, 2),
            SchemeId::Strassen,
            SchemeId::Winograd,
            SchemeId::AccurateSqrt3,
            SchemeId::Powers,
            SchemeId::PowRot,
            SchemeId::Approx0695,
            SchemeId::Approx0661,
            SchemeId::AltBasisCore,
            SchemeId::AltBasisCoB,
            SchemeId::Smirnov336Accurate,
        ]
    }

    /// Bundled schemes that are genuine matrix-multiplication algorithms.
    pub fn bundled_matmul() -> Vec<SchemeId> {
        Self::bundled().into_iter().filter(|s| *s != SchemeId::AltBasisCore).collect()
    }

    /// Stable short name (accepted back by `FromStr`).
    pub fn short_name(&self) -> String {
        match self {
            SchemeId::Conventional(m, k, n) => format!("conventional:{m}x{k}x{n}"),
            SchemeId::Strassen => "strassen".into(),
            SchemeId::Winograd => "winograd".into(),
            SchemeId::AccurateSqrt3 => "accurate".into(),
            SchemeId::Powers => "powers".into(),
            SchemeId::PowRot => "powrot".into(),
            SchemeId::Approx0695 => "approx0695".into(),
            SchemeId::Approx0661 => "approx0661".into(),
            SchemeId::AltBasisCore => "altbasis-core".into(),
            SchemeId::AltBasisCoB => "altbasis".into(),
            SchemeId::Smirnov336Accurate => "smirnov336-accurate".into(),
            SchemeId::External { l, r, p } => {
                format!("external:{},{},{}", l.display(), r.display(), p.display())
            }
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.short_name())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    /// Accepts the short names plus a few aliases; `conventional:MxKxN`
    /// (or `classic`) and `external:L.sms,R.sms,P.sms`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        if let Some(rest) = lower.strip_prefix("external:") {
            let parts: Vec<&str> = s.trim()["external:".len()..].split(',').collect();
            if parts.len() != 3 || rest.is_empty() {
                return Err(Error::InvalidArgument(format!("expected external:L,R,P, got {s}")));
            }
            return Ok(SchemeId::External {
                l: parts[0].into(),
                r: parts[1].into(),
                p: parts[2].into(),
            });
        }
        if let Some(dims) = lower.strip_prefix("conventional:") {
            let d: Vec<usize> = dims.split('x').filter_map(|x| x.parse().ok()).collect();
            if d.len() != 3 || d.contains(&0) {
                return Err(Error::InvalidArgument(format!("bad conventional dimensions {dims}")));
            }
            return Ok(SchemeId::Conventional(d[0], d[1], d[2]));
        }
        Ok(match lower.as_str() {
            "conventional" | "classic" | "classical" => SchemeId::Conventional(2, 2, 2),
            "strassen" => SchemeId::Strassen,
            "winograd" => SchemeId::Winograd,
            "accurate" | "accurate-sqrt3" => SchemeId::AccurateSqrt3,
            "powers" => SchemeId::Powers,
            "powrot" => SchemeId::PowRot,
            "approx0695" | "0695" => SchemeId::Approx0695,
            "approx0661" | "0661" => SchemeId::Approx0661,
            "altbasis-core" => SchemeId::AltBasisCore,
            "altbasis" | "altbasis-cob" => SchemeId::AltBasisCoB,
            "smirnov336-accurate" | "336acc" | "smirnov336acc" => SchemeId::Smirnov336Accurate,
            _ => return Err(Error::InvalidArgument(format!("unknown scheme {s:?}"))),
        })
    }
}

fn mat(rows: &[&[&str]]) -> CoeffMatrix {
    CoeffMatrix::from_strs(rows).expect("bundled coefficient tables are well-formed")
}

fn exact(dims: (usize, usize, usize), l: CoeffMatrix, r: CoeffMatrix, p: CoeffMatrix, name: &str, prov: &str) -> HMRep {
    HMRep::new_exact(dims, l, r, p, name, prov).expect("bundled scheme shapes are consistent")
}

/// The conventional algorithm: product `t = (i·k + j)·n + l` computes
/// `a_ij · b_jl` and contributes to `c_il`.
pub fn conventional(m: usize, k: usize, n: usize) -> HMRep {
    let r = m * k * n;
    let mut l = CoeffMatrix::zeros(r, m * k);
    let mut rr = CoeffMatrix::zeros(r, k * n);
    let mut p = CoeffMatrix::zeros(m * n, r);
    for i in 0..m {
        for j in 0..k {
            for q in 0..n {
                let t = (i * k + j) * n + q;
                l[(t, i * k + j)] = Coefficient::one();
                rr[(t, j * n + q)] = Coefficient::one();
                p[(i * n + q, t)] = Coefficient::one();
            }
        }
    }
    exact((m, k, n), l, rr, p, &format!("conventional<{m},{k},{n}>"), "canonical basis products")
}

fn strassen() -> HMRep {
    let l = CoeffMatrix::from_ints(&[
        &[1, 0, 0, 1],
        &[0, 1, 0, -1],
        &[-1, 0, 1, 0],
        &[1, 1, 0, 0],
        &[1, 0, 0, 0],
        &[0, 0, 0, 1],
        &[0, 0, 1, 1],
    ]);
    let r = CoeffMatrix::from_ints(&[
        &[1, 0, 0, 1],
        &[0, 0, 1, 1],
        &[1, 1, 0, 0],
        &[0, 0, 0, 1],
        &[0, 1, 0, -1],
        &[-1, 0, 1, 0],
        &[1, 0, 0, 0],
    ]);
    let pt = CoeffMatrix::from_ints(&[
        &[1, 0, 0, 1],
        &[1, 0, 0, 0],
        &[0, 0, 0, 1],
        &[-1, 1, 0, 0],
        &[0, 1, 0, 1],
        &[1, 0, 1, 0],
        &[0, 0, 1, -1],
    ]);
    exact((2, 2, 2), l, r, pt.transpose(), "strassen", "Strassen (1969), HM form")
}

fn winograd() -> HMRep {
    let l = CoeffMatrix::from_ints(&[
        &[1, 0, 0, 0],
        &[0, 1, 0, 0],
        &[1, 1, -1, -1],
        &[0, 0, 0, 1],
        &[0, 0, 1, 1],
        &[-1, 0, 1, 1],
        &[1, 0, -1, 0],
    ]);
    let r = CoeffMatrix::from_ints(&[
        &[1, 0, 0, 0],
        &[0, 0, 1, 0],
        &[0, 0, 0, 1],
        &[1, -1, -1, 1],
        &[-1, 1, 0, 0],
        &[1, -1, 0, 1],
        &[0, -1, 0, 1],
    ]);
    let p = CoeffMatrix::from_ints(&[
        &[1, 1, 0, 0, 0, 0, 0],
        &[1, 0, 1, 0, 1, 1, 0],
        &[1, 0, 0, -1, 0, 1, 1],
        &[1, 0, 0, 0, 1, 1, 1],
    ]);
    exact((2, 2, 2), l, r, p, "winograd", "Winograd (1971) variant, HM form of the 15-addition program")
}

// Shorthands for the ℚ(√3) tables: s = √3.
const S2: &str = "sqrt3*1/2";
const S3: &str = "sqrt3*1/3";
const S6: &str = "sqrt3*1/6";
const TS: &str = "sqrt3*2/3"; // 2/√3
const MS2: &str = "-sqrt3*1/2";
const MS3: &str = "-sqrt3*1/3";
const MS6: &str = "-sqrt3*1/6";
const MTS: &str = "-sqrt3*2/3";

fn accurate_sqrt3() -> HMRep {
    let l = mat(&[
        &[S2, "1/2", "1/2", S6],
        &["0", "0", "1", MS3],
        &["0", "1", "0", S3],
        &["0", "0", "0", MTS],
        &[MS2, "-1/2", "1/2", MS2],
        &[MS2, "-1/2", "1/2", S6],
        &[MS2, "1/2", "1/2", MS6],
    ]);
    let r = mat(&[
        &["0", TS, "0", "0"],
        &["-1", S3, "0", "0"],
        &["0", S3, "0", "-1"],
        &["1/2", MS6, S2, "-1/2"],
        &["-1/2", S2, MS2, "-1/2"],
        &["1/2", S6, S2, "1/2"],
        &["1/2", S6, MS2, "-1/2"],
    ]);
    let pt = mat(&[
        &[S6, "1/2", "1/2", S2],
        &[MS3, "0", "-1", "0"],
        &[S3, "-1", "0", "0"],
        &[S6, "-1/2", "-1/2", S2],
        &[S2, "-1/2", "1/2", S2],
        &[MS6, "-1/2", "1/2", S2],
        &[MTS, "0", "0", "0"],
    ]);
    exact((2, 2, 2), l, r, pt.transpose(), "accurate", "gamma2-optimal point of the Strassen orbit, coefficients in Q(sqrt3)")
}

fn powers() -> HMRep {
    let l = mat(&[
        &["0", "-1", "1", "0"],
        &["1", "1/2", "-1/2", "-1/4"],
        &["0", "0", "1", "-1/2"],
        &["0", "1", "0", "-1/2"],
        &["0", "0", "1", "1/2"],
        &["1", "-1/2", "1/2", "-1/4"],
        &["0", "1", "0", "1/2"],
    ]);
    let r = mat(&[
        &["1", "0", "0", "-1"],
        &["1", "1/2", "0", "0"],
        &["0", "1/2", "0", "-1"],
        &["1/2", "1/4", "-1", "-1/2"],
        &["0", "1/2", "0", "1"],
        &["1", "-1/2", "0", "0"],
        &["1/2", "-1/4", "1", "-1/2"],
    ]);
    let pt = mat(&[
        &["0", "1", "1", "0"],
        &["1/2", "1", "0", "0"],
        &["1/4", "-1/2", "-1/2", "1"],
        &["-1/2", "0", "1", "0"],
        &["1/4", "1/2", "1/2", "1"],
        &["1/2", "-1", "0", "0"],
        &["1/2", "0", "1", "0"],
    ]);
    exact((2, 2, 2), l, r, pt.transpose(), "powers", "power-of-two approximation of the accurate scheme")
}

fn powrot() -> HMRep {
    let l = mat(&[
        &["4/9", "-8/9", "-8/9", "-4/9"],
        &["0", "5/9", "0", "10/9"],
        &["8/9", "-2/3", "0", "0"],
        &["4/9", "2/9", "8/9", "4/9"],
        &["0", "-10/9", "0", "0"],
        &["4/9", "-1/3", "-8/9", "2/3"],
        &["-4/9", "-2/9", "8/9", "4/9"],
    ]);
    let r = mat(&[
        &["-3/5", "4/5", "-4/5", "-3/5"],
        &["0", "1/2", "0", "-1"],
        &["-1", "1/2", "0", "0"],
        &["0", "5/4", "0", "0"],
        &["3/5", "-3/10", "4/5", "-2/5"],
        &["2/5", "3/10", "-4/5", "-3/5"],
        &["-3/5", "-9/20", "-4/5", "-3/5"],
    ]);
    let pt = mat(&[
        &["9/20", "9/10", "9/10", "-9/20"],
        &["0", "0", "27/40", "-9/10"],
        &["-9/8", "0", "-9/16", "0"],
        &["9/20", "9/10", "9/40", "9/20"],
        &["-27/40", "9/10", "27/80", "-9/20"],
        &["0", "0", "-9/8", "0"],
        &["9/20", "9/10", "-9/40", "-9/20"],
    ]);
    exact((2, 2, 2), l, r, pt.transpose(), "powrot", "orthogonal rotation of the power-of-two scheme")
}

fn approx0695() -> HMRep {
    const A: &str = "167042/345665";
    const B: &str = "295936/345665";
    const C: &str = "178623/345665";
    const MA: &str = "-167042/345665";
    const MB: &str = "-295936/345665";
    const MC: &str = "-178623/345665";
    let l = mat(&[
        &[MA, B, MB, MA],
        &[MC, "-51622047/176980480", B, A],
        &["0", "-51622047/88490240", "0", "334084/345665"],
        &["-1", "289/512", "0", "0"],
        &["0", "289/256", "0", "0"],
        &[MA, "-24137569/88490240", MB, MA],
        &[MA, "24137569/88490240", MB, A],
    ]);
    let r = mat(&[
        &["-256/289", "-1/2", "1/2", "-256/289"],
        &["-345665/295936", "0", "0", "0"],
        &["-345665/591872", "0", "345665/334084", "0"],
        &["-178623/295936", "-1", "0", "0"],
        &["178623/591872", "1/2", "178623/334084", "256/289"],
        &["-289/1024", "1/2", "-1/2", "256/289"],
        &["-289/1024", "1/2", "1/2", "-256/289"],
    ]);
    // Output rows in row-major order (c11, c12, c21, c22).  The published
    // table lists the c12 and c21 rows in the opposite order; see the
    // provenance string.
    let p = mat(&[
        &[B, B, "0", "0", B, B, "0"],
        &[MC, MC, "0", "1", A, MC, "0"],
        &[C, MA, "1", "0", C, C, "0"],
        &[
            B,
            "51622047/176980480",
            "289/512",
            "-289/512",
            "51622047/176980480",
            "-31906176129/102294717440",
            "-345665/295936",
        ],
    ]);
    exact(
        (2, 2, 2),
        l,
        r,
        p,
        "approx0695",
        "rational approximation (gamma2 ~ 12.0695); P rows c12/c21 reordered to the row-major output convention",
    )
}

fn approx0661() -> HMRep {
    const D1: &str = "33124/38165";
    const D2: &str = "19208/38165";
    const MD1: &str = "-33124/38165";
    const MD2: &str = "-19208/38165";
    let l = mat(&[
        &[D1, D2, MD2, D1],
        &[D1, D2, "18957/38165", "1857786/6449885"],
        &["0", "38416/38165", "0", "3715572/6449885"],
        &["0", "0", "1", "-98/169"],
        &["0", "0", "0", "196/169"],
        &[D1, D2, MD2, "-1882384/6449885"],
        &[D1, MD2, MD2, "1882384/6449885"],
    ]);
    let r = mat(&[
        &["-169/196", "-1/2", "1/2", "-169/196"],
        &["38165/33124", "0", "0", "0"],
        &["38165/66248", "0", "-38165/38416", "0"],
        &["18957/33124", "1", "0", "0"],
        &["18957/66248", "1/2", "18957/38416", "169/196"],
        &["-49/169", "1/2", "-1/2", "169/196"],
        &["-49/169", "1/2", "1/2", "-169/196"],
    ]);
    let p = mat(&[
        &["-18957/38165", D2, "-1", "0", "-18957/38165", "-18957/38165", "0"],
        &[
            MD1,
            "-1857786/6449885",
            "-98/169",
            "98/169",
            "-1857786/6449885",
            "359367849/1264177460",
            "38165/33124",
        ],
        &[D1, D1, "0", "0", D1, D1, "0"],
        &["-18957/38165", "-18957/38165", "0", "1", D2, "-18957/38165", "0"],
    ]);
    exact((2, 2, 2), l, r, p, "approx0661", "rational approximation (gamma2 ~ 12.0661)")
}

/// The change-of-basis matrices `(φ, ψ, ν)` of the bundled alternative
/// basis, with `L = Ls·φ`, `R = Rs·ψ`, `P = νᵀ·Ps`.
pub fn altbasis_cob_matrices() -> (CoeffMatrix, CoeffMatrix, CoeffMatrix) {
    let phi = mat(&[
        &["0", "0", "0", TS],
        &["0", "1", "0", S3],
        &["0", "0", "1", MS3],
        &[MS2, "-1/2", "1/2", MS2],
    ]);
    let psi = mat(&[
        &["0", TS, "0", "0"],
        &["1", MS3, "0", "0"],
        &["0", S3, "0", "-1"],
        &["-1/2", S2, MS2, "-1/2"],
    ]);
    let nu = mat(&[
        &[MTS, "0", "0", "0"],
        &[S3, "-1", "0", "0"],
        &[MS3, "0", "-1", "0"],
        &[S2, "-1/2", "1/2", S2],
    ]);
    (phi, psi, nu)
}

/// The sparse `{0,±1}` core `(Ls, Rs, Ps)` of the bundled alternative basis.
pub fn altbasis_core_matrices() -> (CoeffMatrix, CoeffMatrix, CoeffMatrix) {
    let ls = CoeffMatrix::from_ints(&[
        &[0, 0, 1, -1],
        &[0, 0, 1, 0],
        &[0, 1, 0, 0],
        &[-1, 0, 0, 0],
        &[0, 0, 0, 1],
        &[1, 0, 0, 1],
        &[0, 1, 0, 1],
    ]);
    let rs = CoeffMatrix::from_ints(&[
        &[1, 0, 0, 0],
        &[0, -1, 0, 0],
        &[0, 0, 1, 0],
        &[0, 0, 1, -1],
        &[0, 0, 0, 1],
        &[1, 0, 0, -1],
        &[0, 1, 0, 1],
    ]);
    let pst = CoeffMatrix::from_ints(&[
        &[0, -1, 0, 1],
        &[0, 0, 1, 0],
        &[0, 1, 0, 0],
        &[0, 0, 1, 1],
        &[0, 0, 0, 1],
        &[1, 0, 0, 1],
        &[1, 0, 0, 0],
    ]);
    (ls, rs, pst.transpose())
}

fn altbasis_core() -> HMRep {
    let (l, r, p) = altbasis_core_matrices();
    exact((2, 2, 2), l, r, p, "altbasis-core", "sparse {0,+-1} core of the accurate scheme in the bundled alternative basis")
}

fn altbasis_composed() -> HMRep {
    let (ls, rs, ps) = altbasis_core_matrices();
    let (phi, psi, nu) = altbasis_cob_matrices();
    let l = ls.mul(&phi).expect("shapes");
    let r = rs.mul(&psi).expect("shapes");
    let p = nu.transpose().mul(&ps).expect("shapes");
    exact((2, 2, 2), l, r, p, "altbasis", "sparse core composed with its change of basis")
}

fn smirnov336_accurate() -> HMRep {
    let l = parse_sms(include_str!("../data/smirnov336_accurate_L.sms")).expect("bundled SMS");
    let r = parse_sms(include_str!("../data/smirnov336_accurate_R.sms")).expect("bundled SMS");
    let p = parse_sms(include_str!("../data/smirnov336_accurate_P.sms")).expect("bundled SMS");
    exact((3, 3, 6), l, r, p, "smirnov336-accurate", "accurate isotropy image of Smirnov's <3,3,6;40> scheme")
}

/// Infers `(m, k, n)` from the shapes `L: r×mk`, `R: r×kn`, `P: mn×r`.
fn infer_dims(mk: usize, kn: usize, mn: usize) -> Option<(usize, usize, usize)> {
    let m2 = (mk * mn).checked_div(kn)?;
    if m2 * kn != mk * mn {
        return None;
    }
    let m = (m2 as f64).sqrt().round() as usize;
    if m == 0 || m * m != m2 || !mk.is_multiple_of(m) || !mn.is_multiple_of(m) {
        return None;
    }
    let (k, n) = (mk / m, mn / m);
    (k * n == kn).then_some((m, k, n))
}

/// Loads an external scheme from three SMS files.
pub fn load_external(l: &Path, r: &Path, p: &Path) -> Result<HMRep> {
    let lm = parse_sms(&std::fs::read_to_string(l)?)?;
    let rm = parse_sms(&std::fs::read_to_string(r)?)?;
    let pm = parse_sms(&std::fs::read_to_string(p)?)?;
    if lm.rows() != rm.rows() || pm.cols() != lm.rows() {
        return Err(Error::Dimension(format!(
            "L is {}x{}, R is {}x{}, P is {}x{}: ranks disagree",
            lm.rows(),
            lm.cols(),
            rm.rows(),
            rm.cols(),
            pm.rows(),
            pm.cols()
        )));
    }
    let dims = infer_dims(lm.cols(), rm.cols(), pm.rows()).ok_or_else(|| {
        Error::Dimension(format!(
            "cannot infer <m,k,n> from mk={}, kn={}, mn={}",
            lm.cols(),
            rm.cols(),
            pm.rows()
        ))
    })?;
    let name = l.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "external".into());
    HMRep::new_exact(dims, lm, rm, pm, name, format!("external SMS files {}", l.display()))
}

/// Loads a scheme by identifier.
pub fn load_scheme(id: &SchemeId) -> Result<HMRep> {
    Ok(match id {
        SchemeId::Conventional(m, k, n) => {
            if *m == 0 || *k == 0 || *n == 0 {
                return Err(Error::InvalidArgument("conventional dimensions must be positive".into()));
            }
            conventional(*m, *k, *n)
        }
        SchemeId::Strassen => strassen(),
        SchemeId::Winograd => winograd(),
        SchemeId::AccurateSqrt3 => accurate_sqrt3(),
        SchemeId::Powers => powers(),
        SchemeId::PowRot => powrot(),
        SchemeId::Approx0695 => approx0695(),
        SchemeId::Approx0661 => approx0661(),
        SchemeId::AltBasisCore => altbasis_core(),
        SchemeId::AltBasisCoB => altbasis_composed(),
        SchemeId::Smirnov336Accurate => smirnov336_accurate(),
        SchemeId::External { l, r, p } => load_external(l, r, p)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hmrep::validate_matmul;

    #[test]
    fn strassen_shape_and_brown_row() {
        let h = load_scheme(&SchemeId::Strassen).unwrap();
        assert_eq!(h.rank(), 7);
        assert_eq!(h.dims(), (2, 2, 2));
        let (l, _, _) = h.exact().unwrap();
        // Product 5 is a11 · (b12 − b22): L row 5 = vec([[1,0],[0,0]]).
        assert_eq!(l.row(4), CoeffMatrix::from_ints(&[&[1, 0, 0, 0]]).row(0));
    }

    #[test]
    fn smirnov_shape() {
        let h = load_scheme(&SchemeId::Smirnov336Accurate).unwrap();
        assert_eq!(h.rank(), 40);
        assert_eq!(h.dims(), (3, 3, 6));
    }

    #[test]
    fn conventional_is_binary() {
        let h = load_scheme(&SchemeId::Conventional(2, 2, 2)).unwrap();
        assert_eq!(h.rank(), 8);
        let (l, r, p) = h.exact().unwrap();
        for m in [l, r, p] {
            assert!(m.data().iter().all(|c| c.is_zero() || c.is_one()));
        }
    }

    #[test]
    fn every_bundled_matmul_scheme_validates() {
        for id in SchemeId::bundled_matmul() {
            let rep = validate_matmul(&load_scheme(&id).unwrap());
            assert!(rep.valid, "{id}: {:?}", rep.failures.first());
        }
    }

    #[test]
    fn names_round_trip() {
        for id in SchemeId::bundled() {
            assert_eq!(id.short_name().parse::<SchemeId>().unwrap(), id);
        }
        assert_eq!("conventional:3x3x6".parse::<SchemeId>().unwrap(), SchemeId::Conventional(3, 3, 6));
        assert!("nonsense".parse::<SchemeId>().is_err());
    }

    #[test]
    fn dimension_inference() {
        assert_eq!(infer_dims(9, 18, 18), Some((3, 3, 6)));
        assert_eq!(infer_dims(8, 8, 16), Some((4, 2, 4)));
        assert_eq!(infer_dims(4, 4, 4), Some((2, 2, 2)));
        assert_eq!(infer_dims(5, 4, 4), None);
    }
}
