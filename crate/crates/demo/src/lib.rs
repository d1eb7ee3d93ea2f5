//! Browser demo: decode a shorty-typed argument buffer, compare pasted score
//! groups and estimate test power. Each export takes plain strings and returns
//! JSON so the page needs no bindings beyond `wasm-bindgen`.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use mlaudit::stats::{kruskal_wallis, power_curve, roc_auc, SampleGroups};
use mlaudit::trace::{decode_args, decode_return, parse_shorty};

/// Simulation budget per call, so a typo cannot freeze the tab.
const MAX_SIMS: usize = 5000;

#[wasm_bindgen(js_name = decodeShorty)]
pub fn decode_shorty_js(shorty: &str, args_hex: &str, ret_hex: &str, is_static: bool) -> Result<String, JsError> {
    decode_shorty(shorty, args_hex, ret_hex, is_static).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = compareGroups)]
pub fn compare_groups_js(text: &str) -> Result<String, JsError> {
    compare_groups(text).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = powerCurve)]
pub fn power_curve_js(text: &str, sizes: &str, n_sims: usize, alpha: f64, seed: u64) -> Result<String, JsError> {
    power(text, sizes, n_sims, alpha, seed).map_err(|e| JsError::new(&e))
}

pub fn decode_shorty(shorty: &str, args_hex: &str, ret_hex: &str, is_static: bool) -> Result<String, String> {
    let sig = parse_shorty(shorty.trim()).map_err(|e| e.to_string())?;
    let args = decode_args(&sig, &hex(args_hex)?, is_static).map_err(|e| e.to_string())?;
    let ret_bytes = hex(ret_hex)?;
    let ret = if ret_bytes.is_empty() {
        Value::Null
    } else {
        let v = decode_return(&sig, &ret_bytes).map_err(|e| e.to_string())?;
        json!({ "kind": v.kind().as_char().to_string(), "value": v.to_string() })
    };
    let args: Vec<Value> = args
        .iter()
        .map(|v| json!({ "kind": v.kind().as_char().to_string(), "value": v.to_string() }))
        .collect();
    Ok(json!({ "return_kind": sig.return_kind.as_char().to_string(), "args": args, "ret": ret }).to_string())
}

pub fn compare_groups(text: &str) -> Result<String, String> {
    let groups = parse_groups(text)?;
    let kw = kruskal_wallis(&groups).map_err(|e| e.to_string())?;
    let rows: Vec<Value> = groups
        .groups
        .iter()
        .enumerate()
        .map(|(i, (label, values))| {
            let rest: Vec<f64> = groups
                .groups
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .flat_map(|(_, (_, v))| v.iter().copied())
                .collect();
            json!({
                "label": label,
                "n": values.len(),
                "median": median(values),
                "auc_vs_rest": roc_auc(values, &rest),
            })
        })
        .collect();
    Ok(json!({
        "h": kw.h_statistic,
        "df": kw.degrees_freedom,
        "p": kw.p_value,
        "groups": rows,
    })
    .to_string())
}

pub fn power(text: &str, sizes: &str, n_sims: usize, alpha: f64, seed: u64) -> Result<String, String> {
    if n_sims == 0 || n_sims > MAX_SIMS {
        return Err(format!("simulations must be between 1 and {MAX_SIMS}"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err("alpha must be in (0, 1)".into());
    }
    let groups = parse_groups(text)?;
    let sizes = sizes
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().map_err(|_| format!("bad sample size {s:?}")))
        .collect::<Result<Vec<_>, _>>()?;
    if sizes.is_empty() {
        return Err("no sample sizes".into());
    }
    let curve = power_curve(&groups, &sizes, n_sims, alpha, seed).map_err(|e| e.to_string())?;
    let points: Vec<Value> = curve.iter().map(|&(n, p)| json!({ "n_per_group": n, "power": p })).collect();
    Ok(Value::Array(points).to_string())
}

/// One group per line: `label: v1, v2, ...`. Unlabelled lines are numbered.
fn parse_groups(text: &str) -> Result<SampleGroups, String> {
    let mut groups = SampleGroups::new();
    for (i, line) in text.lines().map(str::trim).filter(|l| !l.is_empty()).enumerate() {
        let (label, values) = match line.split_once(':') {
            Some((l, v)) => (l.trim().to_owned(), v),
            None => (format!("group {}", i + 1), line),
        };
        let values = values
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|_| format!("{label}: bad number {s:?}")))
            .collect::<Result<Vec<_>, _>>()?;
        groups.push(label, values);
    }
    groups.validate().map_err(|e| e.to_string())?;
    Ok(groups)
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 0 {
        (v[m - 1] + v[m]) / 2.0
    } else {
        v[m]
    }
}

fn hex(s: &str) -> Result<Vec<u8>, String> {
    let digits: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if digits.len() % 2 != 0 {
        return Err("odd number of hex digits".into());
    }
    (0..digits.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&digits[i..i + 2], 16).map_err(|_| format!("bad hex {:?}", &digits[i..i + 2])))
        .collect()
}
