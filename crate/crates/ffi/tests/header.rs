//! The generated C header must exist and declare the public surface.

#[test]
fn generated_header_declares_the_api() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/include/seersc.h");
    let header = std::fs::read_to_string(path).expect("header generated at build time");
    assert!(header.contains("#ifndef SEERSC_H"));
    for symbol in [
        "typedef enum SeerscStatus",
        "typedef enum SeerscTier",
        "typedef struct SeerscSampleSet SeerscSampleSet;",
        "typedef struct SeerscAllocation",
        "seersc_sample_set_new",
        "seersc_sample_set_free",
        "seersc_sample_set_push",
        "seersc_sample_set_len",
        "seersc_sample_set_entropy",
        "seersc_sample_set_majority",
        "seersc_sample_set_allocate",
        "seersc_confidence",
        "seersc_thresholds",
        "seersc_allocate",
        "seersc_extract_answer",
        "seersc_string_free",
        "seersc_status_message",
        "seersc_version",
    ] {
        assert!(header.contains(symbol), "header is missing {symbol}");
    }
}
