//! Config-file loading and flag precedence.

use num_complex::Complex64;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Complex number written as `a`, `bi`, `a+bi` or `a-bi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cplx(pub Complex64);

impl FromStr for Cplx {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cannot parse complex number '{s}'"));
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err(bad());
        }
        let Some(body) = t.strip_suffix('i') else {
            return t.parse::<f64>().map(|x| Cplx(Complex64::new(x, 0.0))).map_err(|_| bad());
        };
        // Split at the last sign that is not part of an exponent.
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        let (re, im) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => "1",
            "-" => "-1",
            x => x,
        };
        let re: f64 = re.parse().map_err(|_| bad())?;
        let im: f64 = im.parse().map_err(|_| bad())?;
        Ok(Cplx(Complex64::new(re, im)))
    }
}

impl std::fmt::Display for Cplx {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let Complex64 { re, im } = self.0;
        if im == 0.0 {
            write!(f, "{re}")
        } else if im < 0.0 {
            write!(f, "{re}{im}i")
        } else {
            write!(f, "{re}+{im}i")
        }
    }
}

impl Serialize for Cplx {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Cplx {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
            Pair([f64; 2]),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(Cplx(Complex64::new(x, 0.0))),
            Repr::Pair([re, im]) => Ok(Cplx(Complex64::new(re, im))),
            Repr::Str(s) => s.parse().map_err(de::Error::custom),
        }
    }
}

/// Declares a subcommand's flag struct (all optional) and its resolved config
/// struct (all required, with defaults) from one field list.
macro_rules! command_config {
    ($opts:ident, $cfg:ident { $( $(#[doc = $doc:literal])* $field:ident : $ty:ty = $default:expr ),* $(,)? }) => {
        #[derive(Debug, Clone, Default, clap::Args, serde::Serialize)]
        pub struct $opts {
            $(
                $(#[doc = $doc])*
                #[arg(long)]
                #[serde(skip_serializing_if = "Option::is_none")]
                pub $field: Option<$ty>,
            )*
        }

        #[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $cfg {
            $( $(#[doc = $doc])* pub $field: $ty, )*
        }

        impl Default for $cfg {
            fn default() -> Self {
                Self { $( $field: $default, )* }
            }
        }
    };
}
pub(crate) use command_config;

/// Sections of a config file, one per subcommand.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub channel: Option<toml::Table>,
    pub teleport: Option<toml::Table>,
    pub parity_sweep: Option<toml::Table>,
    pub efficiency_sweep: Option<toml::Table>,
    pub homodyne: Option<toml::Table>,
    pub lattice_map: Option<toml::Table>,
    pub schedule_check: Option<toml::Table>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidParameter(format!("config: {}", e.message())))
    }
}

fn overlay(base: &mut Value, top: Value) {
    if let (Value::Object(b), Value::Object(t)) = (base, top) {
        for (k, v) in t {
            b.insert(k, v);
        }
    }
}

/// `defaults <- file section <- flags`, then validated against `C`.
pub fn resolve<C, O>(section: Option<&toml::Table>, flags: &O) -> Result<C>
where
    C: Default + Serialize + for<'de> Deserialize<'de>,
    O: Serialize,
{
    let mut v = serde_json::to_value(C::default())?;
    if let Some(t) = section {
        overlay(&mut v, serde_json::to_value(t)?);
    }
    overlay(&mut v, serde_json::to_value(flags)?);
    serde_json::from_value(v).map_err(|e| Error::InvalidParameter(format!("config: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    command_config!(DemoOpts, DemoConfig {
        /// A real value.
        x: f64 = 1.5,
        z: Cplx = Cplx(Complex64::new(0.0, 2.0)),
        n: usize = 3,
    });

    #[test]
    fn complex_parsing() {
        let p = |s: &str| s.parse::<Cplx>().unwrap().0;
        assert_eq!(p("2"), Complex64::new(2.0, 0.0));
        assert_eq!(p("2i"), Complex64::new(0.0, 2.0));
        assert_eq!(p("-i"), Complex64::new(0.0, -1.0));
        assert_eq!(p("1.5-0.5i"), Complex64::new(1.5, -0.5));
        assert_eq!(p("1e-3+2e+1i"), Complex64::new(1e-3, 20.0));
        assert!("1+".parse::<Cplx>().is_err());
        assert!("abc".parse::<Cplx>().is_err());
        for s in ["2", "0+2i", "1.5-0.5i"] {
            let c = s.parse::<Cplx>().unwrap();
            assert_eq!(c.to_string().parse::<Cplx>().unwrap(), c);
        }
    }

    #[test]
    fn flags_override_file_override_defaults() {
        let file = ConfigFile::parse("[channel]\nx = 4\nz = \"1-1i\"\n").unwrap();
        let flags = DemoOpts { x: Some(7.0), ..Default::default() };
        let c: DemoConfig = resolve(file.channel.as_ref(), &flags).unwrap();
        assert_eq!(c, DemoConfig { x: 7.0, z: Cplx(Complex64::new(1.0, -1.0)), n: 3 });
        let c: DemoConfig = resolve(None, &DemoOpts::default()).unwrap();
        assert_eq!(c, DemoConfig::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        let file = ConfigFile::parse("[channel]\nbogus = 1\n").unwrap();
        assert!(resolve::<DemoConfig, _>(file.channel.as_ref(), &DemoOpts::default()).is_err());
        assert!(ConfigFile::parse("[nonsense]\nx = 1\n").is_err());
    }
}
