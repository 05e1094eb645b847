#![no_main]

use graphnls::rearrangement::{read_pl_csv, rearrange, write_pl_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(f) = read_pl_csv(data) {
        let mut out = Vec::new();
        write_pl_csv(&f, &mut out).unwrap();
        assert_eq!(read_pl_csv(out.as_slice()).unwrap(), f);
        let _ = rearrange(&f);
    }
});
