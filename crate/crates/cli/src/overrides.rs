//! Dotted `--a.b=value` overrides on top of the JSON config.

use serde_json::Value;

/// Pulls `--key.path=value` / `--key.path value` pairs out of `args`. Plain
/// flags (no dot in the name) are left for clap.
pub fn extract(args: Vec<String>) -> Result<(Vec<String>, Vec<(String, String)>), String> {
    let mut rest = Vec::with_capacity(args.len());
    let mut found = Vec::new();
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        let Some(body) = a.strip_prefix("--") else {
            rest.push(a);
            continue;
        };
        let (name, value) = match body.split_once('=') {
            Some((n, v)) => (n.to_string(), Some(v.to_string())),
            None => (body.to_string(), None),
        };
        if !name.contains('.') {
            rest.push(a);
            continue;
        }
        let value = match value {
            Some(v) => v,
            None => it.next().ok_or_else(|| format!("--{name} needs a value"))?,
        };
        found.push((name, value));
    }
    Ok((rest, found))
}

/// JSON when the text parses as JSON, a string otherwise.
pub fn parse_value(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|_| Value::String(text.to_string()))
}

pub fn apply(config: &mut Value, path: &str, value: Value) -> Result<(), String> {
    let mut node = config;
    let keys: Vec<&str> = path.split('.').collect();
    for (i, key) in keys.iter().enumerate() {
        if key.is_empty() {
            return Err(format!("empty key in `{path}`"));
        }
        let obj = match node {
            Value::Object(m) => m,
            Value::Null => {
                *node = Value::Object(Default::default());
                node.as_object_mut().unwrap()
            }
            _ => return Err(format!("`{}` is not an object", keys[..i].join("."))),
        };
        if i + 1 == keys.len() {
            obj.insert(key.to_string(), value);
            return Ok(());
        }
        node = obj.entry(key.to_string()).or_insert(Value::Null);
    }
    unreachable!("split yields at least one key")
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn dotted_flags_are_split_out() {
        let args = ["partlift", "run", "--camera.resolution=[64,64]", "--eval", "--scene.tier_scale", "0.5", "dir"];
        let (rest, found) = extract(args.iter().map(|s| s.to_string()).collect()).unwrap();
        assert_eq!(rest, vec!["partlift", "run", "--eval", "dir"]);
        assert_eq!(
            found,
            vec![
                ("camera.resolution".to_string(), "[64,64]".to_string()),
                ("scene.tier_scale".to_string(), "0.5".to_string())
            ]
        );
        assert!(extract(vec!["--a.b".to_string()]).is_err());
    }

    #[test]
    fn nested_insert() {
        let mut v = json!({"camera": {"fov_degrees": 60.0}, "noise": null});
        apply(&mut v, "camera.resolution", parse_value("[64,64]")).unwrap();
        apply(&mut v, "noise.probability", parse_value("0.3")).unwrap();
        apply(&mut v, "segmenter.kind", parse_value("oracle")).unwrap();
        assert_eq!(
            v,
            json!({"camera": {"fov_degrees": 60.0, "resolution": [64, 64]}, "noise": {"probability": 0.3}, "segmenter": {"kind": "oracle"}})
        );
        assert!(apply(&mut v, "camera.fov_degrees.x", json!(1)).is_err());
    }
}
