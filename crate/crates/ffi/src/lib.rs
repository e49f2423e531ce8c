//! C ABI over the scoring and budget-allocation core.
//!
//! Callers accumulate probe samples into an opaque set, then read off the
//! confidence-weighted entropy, the majority answer, and the budget
//! decision. Every fallible call returns a [`SeerscStatus`]; results come
//! back through out-pointers. Strings returned through `char **` are owned
//! by the caller and must be released with `seersc_string_free`; the
//! statics from `seersc_status_message` and `seersc_version` must not be
//! freed.

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use seersc::{
    allocate_budget, categorize, compute_thresholds, confidence, extract_answer, majority_vote,
    normalize_answer, weighted_entropy, BudgetTier, Completion, Error, ExtractionRule,
    GenerationMode, ThresholdConfig,
};

/// Result code for every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeerscStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// An argument was out of range or otherwise unusable.
    InvalidArgument = 2,
    /// The input held no usable samples or values.
    EmptyInput = 3,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 4,
    /// The computation itself failed.
    ComputeFailed = 5,
}

/// Budget tier for one problem.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeerscTier {
    Single = 1,
    Half = 2,
    Full = 3,
}

impl From<BudgetTier> for SeerscTier {
    fn from(tier: BudgetTier) -> Self {
        match tier {
            BudgetTier::Single => SeerscTier::Single,
            BudgetTier::Half => SeerscTier::Half,
            BudgetTier::Full => SeerscTier::Full,
        }
    }
}

/// Outcome of a budget allocation over a sample set.
#[repr(C)]
pub struct SeerscAllocation {
    pub entropy_nats: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub tier: SeerscTier,
    /// Number of reasoning paths to draw.
    pub samples: usize,
}

struct Entry {
    answer: Option<String>,
    logprobs: Option<Vec<f64>>,
}

/// Opaque accumulator of probe samples.
pub struct SeerscSampleSet {
    samples: Vec<Entry>,
}

fn status_of(e: &Error) -> SeerscStatus {
    match e {
        Error::EmptyLogprobs | Error::NoExtractableAnswers | Error::ZeroTotal => {
            SeerscStatus::EmptyInput
        }
        Error::DegenerateEntropyRange(_)
        | Error::BadThresholdFractions { .. }
        | Error::ZeroBudget
        | Error::NegativeEntropy(_)
        | Error::ZeroWindow
        | Error::InvalidConfig(_) => SeerscStatus::InvalidArgument,
        _ => SeerscStatus::ComputeFailed,
    }
}

fn guard(f: impl FnOnce() -> SeerscStatus) -> SeerscStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(SeerscStatus::ComputeFailed)
}

fn completions_of(set: &SeerscSampleSet) -> Vec<Completion> {
    set.samples
        .iter()
        .enumerate()
        .map(|(i, entry)| Completion {
            text: entry.answer.clone().unwrap_or_default(),
            answer: entry.answer.clone(),
            token_logprobs: entry.logprobs.clone(),
            token_count: entry.logprobs.as_ref().map_or(0, Vec::len),
            latency_s: 0.0,
            mode: GenerationMode::Direct,
            sample_index: i,
        })
        .collect()
}

fn set_entropy(set: &SeerscSampleSet) -> Result<f64, SeerscStatus> {
    if set.samples.is_empty() {
        return Err(SeerscStatus::EmptyInput);
    }
    let completions = completions_of(set);
    let categories = categorize(&completions);
    if categories.is_empty() {
        return Err(SeerscStatus::EmptyInput);
    }
    weighted_entropy("ffi", &completions, &categories)
        .map(|report| report.entropy_nats)
        .map_err(|e| status_of(&e))
}

/// Create an empty sample set. Release with `seersc_sample_set_free`.
#[no_mangle]
pub extern "C" fn seersc_sample_set_new() -> *mut SeerscSampleSet {
    Box::into_raw(Box::new(SeerscSampleSet {
        samples: Vec::new(),
    }))
}

/// Destroy a sample set created by `seersc_sample_set_new`. Null is a
/// no-op.
///
/// # Safety
/// `set` must be null or a pointer previously returned by
/// `seersc_sample_set_new` that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn seersc_sample_set_free(set: *mut SeerscSampleSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Number of samples pushed so far; 0 for null.
///
/// # Safety
/// `set` must be null or a live sample set pointer.
#[no_mangle]
pub unsafe extern "C" fn seersc_sample_set_len(set: *const SeerscSampleSet) -> usize {
    set.as_ref().map_or(0, |s| s.samples.len())
}

/// Append one sample.
///
/// `answer` may be null for a sample whose answer could not be extracted;
/// otherwise it is normalized before grouping. `logprobs` may be null for
/// a backend without log-probabilities (such samples weigh in with
/// confidence 1.0); when non-null, `logprob_count` must be at least 1 and
/// every value finite.
///
/// # Safety
/// `set` must be a live sample set pointer; `answer` must be null or a
/// NUL-terminated string; `logprobs` must be null or valid for
/// `logprob_count` reads.
#[no_mangle]
pub unsafe extern "C" fn seersc_sample_set_push(
    set: *mut SeerscSampleSet,
    answer: *const c_char,
    logprobs: *const f64,
    logprob_count: usize,
) -> SeerscStatus {
    let Some(set) = set.as_mut() else {
        return SeerscStatus::NullArgument;
    };
    let answer = if answer.is_null() {
        None
    } else {
        match CStr::from_ptr(answer).to_str() {
            Ok(s) => Some(normalize_answer(s)),
            Err(_) => return SeerscStatus::InvalidUtf8,
        }
    };
    let logprobs = if logprobs.is_null() {
        if logprob_count != 0 {
            return SeerscStatus::NullArgument;
        }
        None
    } else {
        if logprob_count == 0 {
            return SeerscStatus::InvalidArgument;
        }
        let values = std::slice::from_raw_parts(logprobs, logprob_count);
        if values.iter().any(|v| !v.is_finite()) {
            return SeerscStatus::InvalidArgument;
        }
        Some(values.to_vec())
    };
    set.samples.push(Entry { answer, logprobs });
    SeerscStatus::Ok
}

/// Confidence-weighted entropy of the answer spread in nats.
///
/// # Safety
/// `set` must be a live sample set pointer; `out_entropy` must be valid
/// for one write.
#[no_mangle]
pub unsafe extern "C" fn seersc_sample_set_entropy(
    set: *const SeerscSampleSet,
    out_entropy: *mut f64,
) -> SeerscStatus {
    let (Some(set), false) = (set.as_ref(), out_entropy.is_null()) else {
        return SeerscStatus::NullArgument;
    };
    guard(|| match set_entropy(set) {
        Ok(entropy) => {
            *out_entropy = entropy;
            SeerscStatus::Ok
        }
        Err(status) => status,
    })
}

/// Plurality answer over the extractable samples, earliest pushed sample
/// breaking ties. `*out_answer` is null when no sample has an answer;
/// otherwise release it with `seersc_string_free`.
///
/// # Safety
/// `set` must be a live sample set pointer; `out_answer` must be valid for
/// one write.
#[no_mangle]
pub unsafe extern "C" fn seersc_sample_set_majority(
    set: *const SeerscSampleSet,
    out_answer: *mut *mut c_char,
) -> SeerscStatus {
    let (Some(set), false) = (set.as_ref(), out_answer.is_null()) else {
        return SeerscStatus::NullArgument;
    };
    guard(|| {
        let answers: Vec<&String> = set.samples.iter().filter_map(|e| e.answer.as_ref()).collect();
        match majority_vote(&answers) {
            Some(answer) => match CString::new(answer) {
                Ok(s) => {
                    *out_answer = s.into_raw();
                    SeerscStatus::Ok
                }
                Err(_) => SeerscStatus::ComputeFailed,
            },
            None => {
                *out_answer = std::ptr::null_mut();
                SeerscStatus::Ok
            }
        }
    })
}

/// Entropy, thresholds, and budget tier for this probe, treating the set
/// size as the probe size M and using the default threshold fractions.
/// `budget_n` is the full reasoning budget N.
///
/// # Safety
/// `set` must be a live sample set pointer; `out` must be valid for one
/// write.
#[no_mangle]
pub unsafe extern "C" fn seersc_sample_set_allocate(
    set: *const SeerscSampleSet,
    budget_n: usize,
    out: *mut SeerscAllocation,
) -> SeerscStatus {
    let (Some(set), false) = (set.as_ref(), out.is_null()) else {
        return SeerscStatus::NullArgument;
    };
    guard(|| {
        let thresholds = match compute_thresholds(set.samples.len(), &ThresholdConfig::default()) {
            Ok(t) => t,
            Err(e) => return status_of(&e),
        };
        let entropy = match set_entropy(set) {
            Ok(e) => e,
            Err(status) => return status,
        };
        match allocate_budget("ffi", entropy, budget_n, &thresholds) {
            Ok(decision) => {
                *out = SeerscAllocation {
                    entropy_nats: decision.entropy_nats,
                    tau1: thresholds.tau1,
                    tau2: thresholds.tau2,
                    tier: decision.tier.into(),
                    samples: decision.samples,
                };
                SeerscStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Exponentiated mean token log-probability of one path.
///
/// # Safety
/// `logprobs` must be valid for `count` reads; `out_confidence` must be
/// valid for one write.
#[no_mangle]
pub unsafe extern "C" fn seersc_confidence(
    logprobs: *const f64,
    count: usize,
    out_confidence: *mut f64,
) -> SeerscStatus {
    if logprobs.is_null() || out_confidence.is_null() {
        return SeerscStatus::NullArgument;
    }
    if count == 0 {
        return SeerscStatus::EmptyInput;
    }
    let values = std::slice::from_raw_parts(logprobs, count);
    if values.iter().any(|v| !v.is_finite()) {
        return SeerscStatus::InvalidArgument;
    }
    match confidence(values) {
        Ok(c) => {
            *out_confidence = c;
            SeerscStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Entropy thresholds `(tau1, tau2)` for a probe of `probe_size` samples:
/// the given fractions of `ln(probe_size)`.
///
/// # Safety
/// `out_tau1` and `out_tau2` must each be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn seersc_thresholds(
    probe_size: usize,
    tau1_fraction: f64,
    tau2_fraction: f64,
    out_tau1: *mut f64,
    out_tau2: *mut f64,
) -> SeerscStatus {
    if out_tau1.is_null() || out_tau2.is_null() {
        return SeerscStatus::NullArgument;
    }
    let cfg = ThresholdConfig {
        tau1_fraction,
        tau2_fraction,
    };
    match compute_thresholds(probe_size, &cfg) {
        Ok(t) => {
            *out_tau1 = t.tau1;
            *out_tau2 = t.tau2;
            SeerscStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Map an entropy score to a budget tier and sample count under the
/// default threshold fractions.
///
/// # Safety
/// `out_tier` and `out_samples` must each be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn seersc_allocate(
    entropy_nats: f64,
    probe_size: usize,
    budget_n: usize,
    out_tier: *mut SeerscTier,
    out_samples: *mut usize,
) -> SeerscStatus {
    if out_tier.is_null() || out_samples.is_null() {
        return SeerscStatus::NullArgument;
    }
    let thresholds = match compute_thresholds(probe_size, &ThresholdConfig::default()) {
        Ok(t) => t,
        Err(e) => return status_of(&e),
    };
    match allocate_budget("ffi", entropy_nats, budget_n, &thresholds) {
        Ok(decision) => {
            *out_tier = decision.tier.into();
            *out_samples = decision.samples;
            SeerscStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Extract and normalize the final answer from completion text: the last
/// boxed-answer marker, falling back to the last non-empty line.
/// `*out_answer` is null when the text holds no answer; otherwise release
/// it with `seersc_string_free`.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out_answer` must be valid for
/// one write.
#[no_mangle]
pub unsafe extern "C" fn seersc_extract_answer(
    text: *const c_char,
    out_answer: *mut *mut c_char,
) -> SeerscStatus {
    if text.is_null() || out_answer.is_null() {
        return SeerscStatus::NullArgument;
    }
    let text = match CStr::from_ptr(text).to_str() {
        Ok(s) => s,
        Err(_) => return SeerscStatus::InvalidUtf8,
    };
    guard(|| match extract_answer(text, &ExtractionRule::BoxedOrLastLine) {
        Ok(Some(answer)) => match CString::new(answer) {
            Ok(s) => {
                *out_answer = s.into_raw();
                SeerscStatus::Ok
            }
            Err(_) => SeerscStatus::ComputeFailed,
        },
        Ok(None) => {
            *out_answer = std::ptr::null_mut();
            SeerscStatus::Ok
        }
        Err(e) => status_of(&e),
    })
}

/// Release a string returned by this library. Null is a no-op.
///
/// # Safety
/// `s` must be null or a string pointer returned by this library that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn seersc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Static description of a status code. Do not free.
#[no_mangle]
pub extern "C" fn seersc_status_message(status: SeerscStatus) -> *const c_char {
    let message: &'static [u8] = match status {
        SeerscStatus::Ok => b"ok\0",
        SeerscStatus::NullArgument => b"a required pointer argument was null\0",
        SeerscStatus::InvalidArgument => b"an argument was out of range\0",
        SeerscStatus::EmptyInput => b"no usable samples or values in the input\0",
        SeerscStatus::InvalidUtf8 => b"a string argument was not valid utf-8\0",
        SeerscStatus::ComputeFailed => b"the computation failed\0",
    };
    message.as_ptr() as *const c_char
}

/// Static library version string. Do not free.
#[no_mangle]
pub extern "C" fn seersc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
