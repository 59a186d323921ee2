//! Every example runs to completion.

mod reed_solomon {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/reed_solomon.rs"));
}

mod strand_codec {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/strand_codec.rs"));
}

mod gini_layout {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/gini_layout.rs"));
}

mod ids_channel {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/ids_channel.rs"));
}

mod consensus_skew {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/consensus_skew.rs"));
}

mod oracle_median {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/oracle_median.rs"));
}

mod priority_mapping {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/priority_mapping.rs"));
}

mod jpeg_quality {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/jpeg_quality.rs"));
}

mod end_to_end {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/end_to_end.rs"));
}

mod experiments {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/experiments.rs"));
}

macro_rules! example_tests {
    ($($name:ident),*) => {$(
        #[test]
        fn $name() {
            $name::run_example().expect(stringify!($name));
        }
    )*};
}

example_tests!(
    reed_solomon,
    strand_codec,
    gini_layout,
    ids_channel,
    consensus_skew,
    oracle_median,
    priority_mapping,
    jpeg_quality,
    end_to_end,
    experiments
);
