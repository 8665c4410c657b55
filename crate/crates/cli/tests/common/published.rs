//! Published per-pipeline results: metric tables and the confusion counts behind them.

use falldet_core::ingest::BodyPosition;
use falldet_core::segment::LabelingScheme;

pub struct PublishedRow {
    pub position: BodyPosition,
    pub scheme: LabelingScheme,
    pub pipeline: &'static str,
    /// MCC, SE, ES, PR.
    pub metrics: [f64; 4],
    /// TP, TN, FP, FN.
    pub counts: [u64; 4],
}

const fn row(
    position: BodyPosition,
    scheme: LabelingScheme,
    pipeline: &'static str,
    metrics: [f64; 4],
    counts: [u64; 4],
) -> PublishedRow {
    PublishedRow {
        position,
        scheme,
        pipeline,
        metrics,
        counts,
    }
}

use BodyPosition::{Chest, LeftWrist, RightWrist};
use LabelingScheme::{L1, L2};

#[rustfmt::skip]
pub const PUBLISHED: [PublishedRow; 72] = [
    row(LeftWrist, L1, "Sc1AccF", [0.8929, 0.9905, 0.8805, 0.9821], [1043, 140, 19, 10]),
    row(LeftWrist, L1, "Sc1AccT", [0.8886, 0.9791, 0.9371, 0.9904], [1031, 149, 10, 22]),
    row(LeftWrist, L1, "Sc1GyrF", [0.8001, 0.9924, 0.7233, 0.9596], [1045, 115, 44, 8]),
    row(LeftWrist, L1, "Sc1GyrT", [0.8690, 0.9839, 0.8805, 0.9820], [0, 140, 19, 17]),
    row(LeftWrist, L1, "Sc2AccF", [0.9299, 0.9962, 0.9057, 0.9859], [1049, 144, 15, 4]),
    row(LeftWrist, L1, "Sc2AccT", [0.9677, 0.9943, 0.9811, 0.9971], [1047, 156, 3, 6]),
    row(LeftWrist, L1, "Sc2GyrF", [0.8862, 0.9820, 0.9182, 0.9876], [1034, 146, 13, 19]),
    row(LeftWrist, L1, "Sc2GyrT", [0.9466, 0.9905, 0.9686, 0.9952], [1043, 154, 5, 10]),
    row(LeftWrist, L1, "Sc3F", [0.9323, 0.9886, 0.9560, 0.9933], [1041, 152, 7, 12]),
    row(LeftWrist, L1, "Sc3T", [0.9186, 0.9858, 0.9497, 0.9924], [1038, 151, 8, 15]),
    row(LeftWrist, L1, "Sc4F", [0.9466, 0.9905, 0.9686, 0.9952], [1043, 154, 5, 10]),
    row(LeftWrist, L1, "Sc4T", [0.9640, 0.9943, 0.9748, 0.9962], [1047, 155, 4, 6]),
    row(RightWrist, L1, "Sc1AccF", [0.8760, 0.9817, 0.9067, 0.9865], [1020, 136, 19, 14]),
    row(RightWrist, L1, "Sc1AccT", [0.8565, 0.9759, 0.9067, 0.9864], [1014, 136, 25, 14]),
    row(RightWrist, L1, "Sc1GyrF", [0.7514, 0.9759, 0.7467, 0.9639], [1014, 112, 25, 38]),
    row(RightWrist, L1, "Sc1GyrT", [0.8025, 0.9894, 0.7467, 0.9644], [1028, 112, 11, 38]),
    row(RightWrist, L1, "Sc2AccF", [0.8608, 0.9952, 0.8000, 0.9718], [1034, 120, 5, 30]),
    row(RightWrist, L1, "Sc2AccT", [0.9131, 0.9875, 0.9333, 0.9903], [1026, 140, 13, 10]),
    row(RightWrist, L1, "Sc2GyrF", [0.8041, 0.9865, 0.7667, 0.9670], [1025, 115, 14, 35]),
    row(RightWrist, L1, "Sc2GyrT", [0.8822, 0.9923, 0.8533, 0.9791], [1031, 128, 8, 22]),
    row(RightWrist, L1, "Sc3F", [0.8778, 0.9798, 0.9200, 0.9883], [1018, 138, 21, 12]),
    row(RightWrist, L1, "Sc3T", [0.8794, 0.9827, 0.9067, 0.9865], [1021, 136, 18, 14]),
    row(RightWrist, L1, "Sc4F", [0.8774, 0.9981, 0.8067, 0.9728], [1037, 121, 2, 29]),
    row(RightWrist, L1, "Sc4T", [0.8794, 0.9827, 0.9067, 0.9865], [1021, 136, 18, 14]),
    row(Chest, L1, "Sc1AccF", [0.8934, 0.9972, 0.8392, 0.9788], [1062, 120, 23, 3]),
    row(Chest, L1, "Sc1AccT", [0.9202, 0.9915, 0.9231, 0.9897], [1056, 132, 11, 9]),
    row(Chest, L1, "Sc1GyrF", [0.9085, 0.9897, 0.9161, 0.9887], [1054, 131, 12, 11]),
    row(Chest, L1, "Sc1GyrT", [0.9212, 0.9897, 0.9371, 0.9915], [1054, 134, 9, 11]),
    row(Chest, L1, "Sc2AccF", [0.9600, 0.9972, 0.9510, 0.9935], [1062, 136, 7, 3]),
    row(Chest, L1, "Sc2AccT", [0.9843, 0.9972, 0.9930, 0.9991], [1062, 142, 1, 3]),
    row(Chest, L1, "Sc2GyrF", [0.9114, 0.9925, 0.9021, 0.9869], [1057, 129, 14, 8]),
    row(Chest, L1, "Sc2GyrT", [0.9490, 0.9925, 0.9650, 0.9953], [1057, 138, 5, 8]),
    row(Chest, L1, "Sc3F", [0.9273, 0.9953, 0.9091, 0.9879], [1060, 130, 13, 5]),
    row(Chest, L1, "Sc3T", [0.9254, 0.9897, 0.9441, 0.9925], [1054, 135, 8, 11]),
    row(Chest, L1, "Sc4F", [0.9841, 1.0000, 0.9720, 0.9963], [1065, 139, 4, 0]),
    row(Chest, L1, "Sc4T", [0.9881, 0.9991, 0.9860, 0.9981], [1064, 141, 2, 1]),
    row(LeftWrist, L2, "Sc1AccF", [0.8366, 0.9797, 0.8740, 0.9852], [1063, 111, 22, 16]),
    row(LeftWrist, L2, "Sc1AccT", [0.8817, 0.9871, 0.8976, 0.9880], [1071, 114, 14, 13]),
    row(LeftWrist, L2, "Sc1GyrF", [0.7991, 0.9779, 0.8268, 0.9797], [1061, 105, 24, 22]),
    row(LeftWrist, L2, "Sc1GyrT", [0.8672, 0.9867, 0.8616, 0.9793], [1039, 137, 14, 22]),
    row(LeftWrist, L2, "Sc2AccF", [0.9008, 0.9871, 0.9291, 0.9917], [1071, 118, 14, 9]),
    row(LeftWrist, L2, "Sc2AccT", [0.9606, 0.9954, 0.9685, 0.9963], [1080, 123, 5, 4]),
    row(LeftWrist, L2, "Sc2GyrF", [0.8465, 0.9797, 0.8898, 0.9870], [1063, 113, 22, 14]),
    row(LeftWrist, L2, "Sc2GyrT", [0.8865, 0.9871, 0.9055, 0.9889], [1071, 115, 14, 12]),
    row(LeftWrist, L2, "Sc3F", [0.8979, 0.9908, 0.8976, 0.9881], [1075, 114, 10, 13]),
    row(LeftWrist, L2, "Sc3T", [0.8770, 0.9825, 0.9213, 0.9907], [1066, 117, 19, 10]),
    row(LeftWrist, L2, "Sc4F", [0.9181, 0.9889, 0.9449, 0.9935], [1073, 120, 12, 7]),
    row(LeftWrist, L2, "Sc4T", [0.9648, 0.9963, 0.9685, 0.9963], [1081, 123, 4, 4]),
    row(RightWrist, L2, "Sc1AccF", [0.8994, 0.9916, 0.8974, 0.9888], [1063, 105, 12, 9]),
    row(RightWrist, L2, "Sc1AccT", [0.8507, 0.9832, 0.8803, 0.9868], [1054, 103, 14, 18]),
    row(RightWrist, L2, "Sc1GyrF", [0.8076, 0.9832, 0.8120, 0.9795], [1054, 95, 22, 18]),
    row(RightWrist, L2, "Sc1GyrT", [0.8914, 0.9888, 0.9060, 0.9897], [1060, 106, 11, 12]),
    row(RightWrist, L2, "Sc2AccF", [0.9186, 0.9935, 0.9145, 0.9906], [1065, 107, 10, 7]),
    row(RightWrist, L2, "Sc2AccT", [0.9579, 0.9944, 0.9744, 0.9971], [1066, 114, 3, 6]),
    row(RightWrist, L2, "Sc2GyrF", [0.8759, 0.9888, 0.8803, 0.9869], [1060, 103, 14, 12]),
    row(RightWrist, L2, "Sc2GyrT", [0.8984, 0.9869, 0.9316, 0.9924], [1058, 109, 8, 14]),
    row(RightWrist, L2, "Sc3F", [0.9392, 0.9925, 0.9573, 0.9953], [1064, 112, 5, 8]),
    row(RightWrist, L2, "Sc3T", [0.8820, 0.9953, 0.8376, 0.9825], [1067, 98, 19, 5]),
    row(RightWrist, L2, "Sc4F", [0.9575, 0.9953, 0.9658, 0.9962], [1067, 113, 4, 5]),
    row(RightWrist, L2, "Sc4T", [0.9169, 0.9888, 0.9487, 0.9943], [1060, 111, 6, 12]),
    row(Chest, L2, "Sc1AccF", [0.9671, 0.9954, 0.9828, 0.9982], [1087, 114, 2, 5]),
    row(Chest, L2, "Sc1AccT", [0.9616, 0.9973, 0.9569, 0.9954], [1089, 111, 5, 3]),
    row(Chest, L2, "Sc1GyrF", [0.9582, 0.9936, 0.9828, 0.9982], [1085, 114, 2, 7]),
    row(Chest, L2, "Sc1GyrT", [0.9665, 0.9973, 0.9655, 0.9963], [1089, 112, 4, 3]),
    row(Chest, L2, "Sc2AccF", [0.9809, 0.9982, 0.9828, 0.9982], [1090, 114, 2, 2]),
    row(Chest, L2, "Sc2AccT", [0.9904, 1.0000, 0.9828, 0.9982], [1092, 114, 2, 0]),
    row(Chest, L2, "Sc2GyrF", [0.9858, 0.9982, 0.9914, 0.9991], [1090, 115, 1, 2]),
    row(Chest, L2, "Sc2GyrT", [0.8116, 1.0000, 0.6810, 0.9672], [1092, 79, 37, 0]),
    row(Chest, L2, "Sc3F", [0.9765, 0.9963, 0.9914, 0.9991], [1088, 115, 1, 4]),
    row(Chest, L2, "Sc3T", [0.9619, 0.9963, 0.9655, 0.9963], [1088, 112, 4, 4]),
    row(Chest, L2, "Sc4F", [0.9714, 0.9973, 0.9741, 0.9973], [1089, 113, 3, 3]),
    row(Chest, L2, "Sc4T", [0.9952, 1.0000, 0.9914, 0.9991], [1092, 115, 1, 0]),
];
