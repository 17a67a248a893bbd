//! Column view of a state: one tensor per (column, row) grid slot with axes
//! `[s, up, down, left, right]`; missing legs have dimension 1 and empty
//! slots hold a trivial `1×1×1×1×1` tensor.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::lattice::{column_partition, ColumnPartition};
use crate::linalg::Tensor;
use crate::tn::TnState;

#[derive(Clone, Debug)]
pub(crate) struct Slot {
    pub vertex: Option<usize>,
    pub t: Tensor,
}

#[derive(Clone, Debug)]
pub(crate) struct Columns {
    pub partition: ColumnPartition,
    /// `slots[b][r]`.
    pub slots: Vec<Vec<Slot>>,
}

impl Columns {
    pub fn new(state: &TnState) -> Result<Self> {
        let lat = state.lattice();
        if !lat.is_embedded() {
            return Err(Error::InvalidArgument("sampling needs a grid-embedded lattice".into()));
        }
        let partition = column_partition(lat);
        let rows = partition.num_rows();
        let mut slots = Vec::with_capacity(partition.num_columns());
        for b in 0..partition.num_columns() {
            let mut col = Vec::with_capacity(rows);
            for r in 0..rows {
                col.push(match partition.site(b, r) {
                    None => Slot { vertex: None, t: Tensor::new(vec![1; 5], vec![C64::new(1.0, 0.0)]) },
                    Some(v) => Slot { vertex: Some(v), t: slot_tensor(state, &partition, v, b, r) },
                });
            }
            slots.push(col);
        }
        Ok(Columns { partition, slots })
    }

    pub fn num_columns(&self) -> usize {
        self.slots.len()
    }

    pub fn num_rows(&self) -> usize {
        self.partition.num_rows()
    }
}

fn slot_tensor(state: &TnState, part: &ColumnPartition, v: usize, b: usize, r: usize) -> Tensor {
    let lat = state.lattice();
    let mut dir: [Option<usize>; 4] = [None; 4]; // up, down, left, right
    for &w in lat.neighbors(v) {
        let (bw, rw) = (part.column_of[w], part.row_of[w]);
        let k = if bw == b && rw + 1 == r {
            0
        } else if bw == b && rw == r + 1 {
            1
        } else if bw + 1 == b && rw == r {
            2
        } else if bw == b + 1 && rw == r {
            3
        } else {
            unreachable!("embedded edges are unit steps")
        };
        dir[k] = Some(w);
    }
    // existing axes in [s, up, down, left, right] order, then expand
    let mut perm = vec![0];
    let mut shape = vec![2];
    for d in dir {
        match d {
            Some(w) => {
                let ax = state.bond_axis(v, w);
                shape.push(state.tensor(v).shape()[ax]);
                perm.push(ax);
            }
            None => shape.push(1),
        }
    }
    state.tensor(v).permute(&perm).reshape(shape)
}
