//! Serde helpers writing reals as shortest round-trip decimal strings.

use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if !v.is_finite() {
        return Err(serde::ser::Error::custom("non-finite real in geometry"));
    }
    s.serialize_str(&format!("{v:?}"))
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Text(String),
        Num(f64),
    }
    match Repr::deserialize(d)? {
        Repr::Text(t) => t.trim().parse::<f64>().map_err(D::Error::custom),
        Repr::Num(x) => Ok(x),
    }
}

#[cfg(test)]
mod tests {
    use crate::geom2d::Vec2;

    #[test]
    fn round_trip_is_exact() {
        let v = Vec2::new(0.1 + 0.2, -1.0e-300);
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"{"x":"0.30000000000000004","y":"-1e-300"}"#);
        let w: Vec2 = serde_json::from_str(&s).unwrap();
        assert_eq!(v, w);
    }
}
