//! Parsing a metric document, including a rejected one.

use finsler_mroot::cli::document::parse_spec;

fn main() {
    let good = r#"{
        "name": "cubic",
        "dimension": 2,
        "order": 3,
        "tensor": [
            {"indices": [1, 1, 1], "poly": [{"exponents": [0, 0], "coeff": 1.0}, {"exponents": [1, 0], "coeff": 1.0}]},
            {"indices": [2, 2, 2], "poly": [{"exponents": [0, 0], "coeff": 1.0}]}
        ],
        "one_form": [{"index": 1, "poly": [{"exponents": [0, 0], "coeff": 1.0}]}]
    }"#;
    match parse_spec(good) {
        Ok(spec) => println!(
            "parsed {:?}: n = {}, m = {}, warnings {:?}",
            spec.document.name,
            spec.field.dim(),
            spec.field.order(),
            spec.warnings
        ),
        Err(e) => println!("unexpected: {e}"),
    }

    let bad = good.replace("[2, 2, 2]", "[2, 1, 2]");
    match parse_spec(&bad) {
        Ok(_) => println!("unexpectedly accepted"),
        Err(e) => println!("rejected: {e}"),
    }
}
