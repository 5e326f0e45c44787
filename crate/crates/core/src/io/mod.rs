//! On-disk formats: probability maps, ground truth, manifests and lane output.

mod ground_truth;
mod lane_output;
mod manifest;
mod probmap;

pub use ground_truth::{
    format_lines_txt, load_ground_truth, parse_hsamples_json, parse_lines_txt, write_lines_txt,
    ActivePair, GroundTruthFormat, GroundTruthFrame, Polyline, HSAMPLES_SENTINEL,
};
pub use lane_output::{
    read_lane_output, sample_rows, write_lane_output, FrameLaneOutput, LaneModelRecord, LaneRecord,
    LANE_OUTPUT_FORMAT,
};
pub use manifest::{Clip, Manifest, ManifestEntry};
pub use probmap::{
    channel_from_gray8, decode_raw, encode_raw, load_gray8_frame, load_probmap, save_raw, Channel,
    ProbMapFormat, ProbMapFrame, RAW_HEADER_LEN, RAW_MAGIC,
};
