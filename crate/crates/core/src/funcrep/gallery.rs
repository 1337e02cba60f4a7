use super::{parse_exppoly, Disc, HoloMap, Lattice, Series, TargetGeometry};
use crate::error::{Error, Result};
use crate::exact::{gq, gq_to_c64, parse_gq, rat, ExpPoly, Gq, Poly};
use num_complex::{Complex, Complex64 as C};
use serde::Serialize;
use std::collections::BTreeMap;

/// Named parameters, as read from a config section.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GalleryParams(pub BTreeMap<String, String>);

impl GalleryParams {
    pub fn with(mut self, key: &str, value: &str) -> Self {
        self.0.insert(key.to_string(), value.to_string());
        self
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn gq_or(&self, key: &str, default: Gq) -> Result<Gq> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => parse_gq(s).ok_or_else(|| Error::Config(format!("`{key}`: cannot parse `{s}` as a complex number"))),
        }
    }

    fn coeffs(&self, key: &str) -> Result<Poly> {
        let s = self.get(key).ok_or_else(|| Error::Config(format!("missing parameter `{key}`")))?;
        let cs = s
            .split(',')
            .map(|t| parse_gq(t).ok_or_else(|| Error::Config(format!("`{key}`: cannot parse `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Poly::new(cs))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: &'static str,
    pub description: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct GalleryEntry {
    pub name: &'static str,
    pub domain_radius: &'static str,
    pub geometry: &'static str,
    pub params: Vec<ParamSpec>,
    pub description: &'static str,
}

fn p(name: &'static str, default: &'static str, description: &'static str) -> ParamSpec {
    ParamSpec { name, default, description }
}

/// One record per gallery entry, in the order they are documented.
pub fn gallery_manifest() -> Vec<GalleryEntry> {
    vec![
        GalleryEntry {
            name: "exp",
            domain_radius: "inf",
            geometry: "P1-FubiniStudy",
            params: vec![p("rate", "1", "complex a in exp(a z)")],
            description: "exponential map",
        },
        GalleryEntry { name: "z", domain_radius: "inf", geometry: "P1-FubiniStudy", params: vec![], description: "identity map" },
        GalleryEntry {
            name: "poly",
            domain_radius: "inf",
            geometry: "P1-FubiniStudy",
            params: vec![p("coeffs", "", "coefficients, lowest degree first")],
            description: "polynomial",
        },
        GalleryEntry {
            name: "rational",
            domain_radius: "inf",
            geometry: "P1-FubiniStudy",
            params: vec![
                p("num", "", "numerator coefficients, lowest degree first"),
                p("den", "1", "denominator coefficients, lowest degree first"),
                p("radius", "inf", "domain radius"),
            ],
            description: "rational function, reduced by exact gcd",
        },
        GalleryEntry {
            name: "exppoly",
            domain_radius: "inf",
            geometry: "P1-FubiniStudy",
            params: vec![p("expr", "", "sum of terms c*z^k*e^{l z}")],
            description: "exponential polynomial",
        },
        GalleryEntry {
            name: "mobius-half",
            domain_radius: "inf",
            geometry: "P1-FubiniStudy",
            params: vec![],
            description: "(z - 1/2)/(z + 2)",
        },
        GalleryEntry {
            name: "lambda",
            domain_radius: "1",
            geometry: "P1-FubiniStudy",
            params: vec![],
            description: "modular lambda composed with the Cayley map",
        },
        GalleryEntry {
            name: "lambda-poincare",
            domain_radius: "1",
            geometry: "Poincare-pullback",
            params: vec![],
            description: "modular lambda as a covering of the thrice-punctured sphere",
        },
        GalleryEntry {
            name: "torus-proj",
            domain_radius: "inf",
            geometry: "Torus-flat",
            params: vec![
                p("lattice", "1, i", "two periods"),
                p("scale", "1", "lift z -> scale*z"),
            ],
            description: "projection of the plane onto a flat torus",
        },
        GalleryEntry {
            name: "inv-one-minus-z",
            domain_radius: "1",
            geometry: "P1-FubiniStudy",
            params: vec![],
            description: "1/(1 - z) on the unit disc",
        },
        GalleryEntry {
            name: "exp-series",
            domain_radius: "inf",
            geometry: "P1-FubiniStudy",
            params: vec![],
            description: "exp as a power series with certified tail",
        },
    ]
}

pub fn gallery(name: &str, params: &GalleryParams) -> Result<(HoloMap, TargetGeometry)> {
    let fs = TargetGeometry::P1FubiniStudy;
    let m = match name {
        "exp" => {
            let rate = params.gq_or("rate", gq(1, 0))?;
            HoloMap::exp_poly(ExpPoly::exp_term(gq(1, 0), rate), Disc::plane())
        }
        "z" => HoloMap::polynomial(Poly::identity()),
        "poly" => HoloMap::polynomial(params.coeffs("coeffs")?),
        "rational" => {
            let den = if params.get("den").is_some() { params.coeffs("den")? } else { Poly::one() };
            let disc = match params.get("radius") {
                None | Some("inf") => Disc::plane(),
                Some(r) => Disc::new(r.trim().parse().map_err(|_| Error::Config(format!("bad radius `{r}`")))?)?,
            };
            HoloMap::rational(params.coeffs("num")?, den, disc)?
        }
        "exppoly" => {
            let expr = params.get("expr").ok_or_else(|| Error::Config("missing parameter `expr`".into()))?;
            HoloMap::exp_poly(parse_exppoly(expr)?, Disc::plane())
        }
        "mobius-half" => {
            let num = Poly::new(vec![Complex::new(rat(-1, 2), rat(0, 1)), gq(1, 0)]);
            let den = Poly::new(vec![gq(2, 0), gq(1, 0)]);
            HoloMap::rational(num, den, Disc::plane())?
        }
        "lambda" => HoloMap::lambda(),
        "lambda-poincare" => return Ok((HoloMap::lambda().with_name("lambda-poincare"), TargetGeometry::PoincarePullback)),
        "torus-proj" => {
            let lattice = match params.get("lattice") {
                None => Lattice::gaussian(),
                Some(s) => {
                    let v = s
                        .split(',')
                        .map(|t| parse_gq(t).map(|g| gq_to_c64(&g)))
                        .collect::<Option<Vec<C>>>()
                        .filter(|v| v.len() == 2)
                        .ok_or_else(|| Error::Config(format!("`lattice`: expected two periods, got `{s}`")))?;
                    Lattice::new(v[0], v[1])?
                }
            };
            let scale = gq_to_c64(&params.gq_or("scale", gq(1, 0))?);
            let geom = TargetGeometry::TorusFlat(lattice.clone());
            return Ok((HoloMap::torus_lift(lattice, scale), geom));
        }
        "inv-one-minus-z" => HoloMap::rational(Poly::one(), Poly::new(vec![gq(1, 0), gq(-1, 0)]), Disc::unit())?,
        "exp-series" => {
            let fact = |n: usize| (1..=n).fold(1.0, |a, k| a / k as f64);
            HoloMap::series(Series::new(move |n| C::new(fact(n), 0.0), fact, f64::INFINITY), Disc::plane())?
        }
        other => return Err(Error::UnknownName(other.to_string())),
    };
    Ok((m.with_name(name), fs))
}

pub const CURVE_NAMES: [&str; 5] = ["veronese-1", "veronese-2", "exp-1", "exp-2", "exp-line"];

/// Component lists for the named curves: [1:z], [1:z:z²], [1:eᶻ],
/// [1:eᶻ:e²ᶻ] and [1:eᶻ:0].
pub fn curve_gallery(name: &str) -> Result<Vec<HoloMap>> {
    let exprs: &[&str] = match name {
        "veronese-1" => &["1", "z"],
        "veronese-2" => &["1", "z", "z^2"],
        "exp-1" => &["1", "e^{z}"],
        "exp-2" => &["1", "e^{z}", "e^{2z}"],
        "exp-line" => &["1", "e^{z}", "0"],
        other => return Err(Error::UnknownName(other.to_string())),
    };
    exprs
        .iter()
        .map(|e| Ok(HoloMap::exp_poly(parse_exppoly(e)?, Disc::plane()).with_name(e)))
        .collect()
}
