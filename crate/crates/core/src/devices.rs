//! Frozen coupling maps of the IBM heavy-hex devices.
//!
//! Coordinates are `(x, y)` = (column, row) in the usual device drawing:
//! qubit lines run horizontally on even rows and bridge qubits sit on the
//! odd rows between them, so every edge joins two sites that differ by one
//! unit in exactly one coordinate.

pub(crate) const GUADALUPE_EDGES: [(usize, usize); 16] = [
    (0, 1), (1, 2), (1, 4), (2, 3), (3, 5), (4, 7), (5, 8), (6, 7),
    (7, 10), (8, 9), (8, 11), (10, 12), (11, 14), (12, 13), (12, 15), (13, 14),
];
pub(crate) const GUADALUPE_COORDS: [(i64, i64); 16] = [
    (0, 1), (1, 1), (1, 2), (1, 3), (2, 1), (2, 3), (3, 0), (3, 1),
    (3, 3), (3, 4), (4, 1), (4, 3), (5, 1), (5, 2), (5, 3), (6, 1),
];

pub(crate) const GENEVA_EDGES: [(usize, usize); 28] = [
    (0, 1), (1, 2), (1, 4), (2, 3), (3, 5), (4, 7), (5, 8), (6, 7),
    (7, 10), (8, 9), (8, 11), (10, 12), (11, 14), (12, 13), (12, 15), (13, 14),
    (14, 16), (15, 18), (16, 19), (17, 18), (18, 21), (19, 20), (19, 22), (21, 23),
    (22, 25), (23, 24), (24, 25), (25, 26),
];
pub(crate) const GENEVA_COORDS: [(i64, i64); 27] = [
    (0, 1), (1, 1), (1, 2), (1, 3), (2, 1), (2, 3), (3, 0), (3, 1),
    (3, 3), (3, 4), (4, 1), (4, 3), (5, 1), (5, 2), (5, 3), (6, 1),
    (6, 3), (7, 0), (7, 1), (7, 3), (7, 4), (8, 1), (8, 3), (9, 1),
    (9, 2), (9, 3), (10, 3),
];

pub(crate) const WASHINGTON_EDGES: [(usize, usize); 144] = [
    (0, 1), (0, 14), (1, 2), (2, 3), (3, 4), (4, 5), (4, 15), (5, 6),
    (6, 7), (7, 8), (8, 9), (8, 16), (9, 10), (10, 11), (11, 12), (12, 13),
    (12, 17), (14, 18), (15, 22), (16, 26), (17, 30), (18, 19), (19, 20), (20, 21),
    (20, 33), (21, 22), (22, 23), (23, 24), (24, 25), (24, 34), (25, 26), (26, 27),
    (27, 28), (28, 29), (28, 35), (29, 30), (30, 31), (31, 32), (32, 36), (33, 39),
    (34, 43), (35, 47), (36, 51), (37, 38), (37, 52), (38, 39), (39, 40), (40, 41),
    (41, 42), (41, 53), (42, 43), (43, 44), (44, 45), (45, 46), (45, 54), (46, 47),
    (47, 48), (48, 49), (49, 50), (49, 55), (50, 51), (52, 56), (53, 60), (54, 64),
    (55, 68), (56, 57), (57, 58), (58, 59), (58, 71), (59, 60), (60, 61), (61, 62),
    (62, 63), (62, 72), (63, 64), (64, 65), (65, 66), (66, 67), (66, 73), (67, 68),
    (68, 69), (69, 70), (70, 74), (71, 77), (72, 81), (73, 85), (74, 89), (75, 76),
    (75, 90), (76, 77), (77, 78), (78, 79), (79, 80), (79, 91), (80, 81), (81, 82),
    (82, 83), (83, 84), (83, 92), (84, 85), (85, 86), (86, 87), (87, 88), (87, 93),
    (88, 89), (90, 94), (91, 98), (92, 102), (93, 106), (94, 95), (95, 96), (96, 97),
    (96, 109), (97, 98), (98, 99), (99, 100), (100, 101), (100, 110), (101, 102), (102, 103),
    (103, 104), (104, 105), (104, 111), (105, 106), (106, 107), (107, 108), (108, 112), (109, 114),
    (110, 118), (111, 122), (112, 126), (113, 114), (114, 115), (115, 116), (116, 117), (117, 118),
    (118, 119), (119, 120), (120, 121), (121, 122), (122, 123), (123, 124), (124, 125), (125, 126),
];
pub(crate) const WASHINGTON_COORDS: [(i64, i64); 127] = [
    (0, 0), (1, 0), (2, 0), (3, 0), (4, 0), (5, 0), (6, 0), (7, 0),
    (8, 0), (9, 0), (10, 0), (11, 0), (12, 0), (13, 0), (0, 1), (4, 1),
    (8, 1), (12, 1), (0, 2), (1, 2), (2, 2), (3, 2), (4, 2), (5, 2),
    (6, 2), (7, 2), (8, 2), (9, 2), (10, 2), (11, 2), (12, 2), (13, 2),
    (14, 2), (2, 3), (6, 3), (10, 3), (14, 3), (0, 4), (1, 4), (2, 4),
    (3, 4), (4, 4), (5, 4), (6, 4), (7, 4), (8, 4), (9, 4), (10, 4),
    (11, 4), (12, 4), (13, 4), (14, 4), (0, 5), (4, 5), (8, 5), (12, 5),
    (0, 6), (1, 6), (2, 6), (3, 6), (4, 6), (5, 6), (6, 6), (7, 6),
    (8, 6), (9, 6), (10, 6), (11, 6), (12, 6), (13, 6), (14, 6), (2, 7),
    (6, 7), (10, 7), (14, 7), (0, 8), (1, 8), (2, 8), (3, 8), (4, 8),
    (5, 8), (6, 8), (7, 8), (8, 8), (9, 8), (10, 8), (11, 8), (12, 8),
    (13, 8), (14, 8), (0, 9), (4, 9), (8, 9), (12, 9), (0, 10), (1, 10),
    (2, 10), (3, 10), (4, 10), (5, 10), (6, 10), (7, 10), (8, 10), (9, 10),
    (10, 10), (11, 10), (12, 10), (13, 10), (14, 10), (2, 11), (6, 11), (10, 11),
    (14, 11), (1, 12), (2, 12), (3, 12), (4, 12), (5, 12), (6, 12), (7, 12),
    (8, 12), (9, 12), (10, 12), (11, 12), (12, 12), (13, 12), (14, 12),
];
