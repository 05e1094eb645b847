#![no_main]

use graphnls::graph::read_csv_any;
use graphnls::StarGraphParams;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(f) = read_csv_any(data, -1.0, 1.0) {
        let p = StarGraphParams::new(f.edges(), -1.0, 1.0).unwrap();
        let mut out = Vec::new();
        graphnls::graph::write_csv(&f, &mut out).unwrap();
        let back = graphnls::graph::read_csv(out.as_slice(), p).unwrap();
        assert_eq!(back.edges(), f.edges());
    }
});
