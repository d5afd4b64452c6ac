//! Placeholder; harness lands after the flow engines.
