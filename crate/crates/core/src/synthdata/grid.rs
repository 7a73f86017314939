//! Index-exact flips, quarter-turn rotations and crops on depth-major 3D
//! grids.

fn strides(dims: [usize; 3]) -> [usize; 3] {
    [dims[1] * dims[2], dims[2], 1]
}

/// Copy the box starting at `offset` with extents `size`.
pub fn crop<T: Copy>(data: &[T], dims: [usize; 3], offset: [usize; 3], size: [usize; 3]) -> Vec<T> {
    assert!(
        (0..3).all(|a| offset[a] + size[a] <= dims[a]),
        "crop box out of bounds"
    );
    let s = strides(dims);
    let mut out = Vec::with_capacity(size.iter().product());
    for z in 0..size[0] {
        for y in 0..size[1] {
            let start = (offset[0] + z) * s[0] + (offset[1] + y) * s[1] + offset[2];
            out.extend_from_slice(&data[start..start + size[2]]);
        }
    }
    out
}

/// Reverse the order of voxels along `axis`.
pub fn flip<T: Copy>(data: &[T], dims: [usize; 3], axis: usize) -> Vec<T> {
    let s = strides(dims);
    let mut out = data.to_vec();
    for z in 0..dims[0] {
        for y in 0..dims[1] {
            for x in 0..dims[2] {
                let mut src = [z, y, x];
                src[axis] = dims[axis] - 1 - src[axis];
                out[z * s[0] + y * s[1] + x] = data[src[0] * s[0] + src[1] * s[1] + src[2]];
            }
        }
    }
    out
}

/// Rotate by `quarter_turns × 90°` in the plane of axes `plane = [a, b]`,
/// mapping output `(i, j)` to input `(n_a − 1 − j, i)` per turn. Returns the
/// new data and extents.
pub fn rotate<T: Copy>(
    data: &[T],
    dims: [usize; 3],
    plane: [usize; 2],
    quarter_turns: u8,
) -> (Vec<T>, [usize; 3]) {
    let [a, b] = plane;
    assert!(
        a != b && a < 3 && b < 3,
        "rotation plane needs two distinct axes"
    );
    let mut cur = data.to_vec();
    let mut cur_dims = dims;
    for _ in 0..quarter_turns % 4 {
        let mut out_dims = cur_dims;
        out_dims.swap(a, b);
        let si = strides(cur_dims);
        let so = strides(out_dims);
        let mut out = cur.clone();
        for z in 0..out_dims[0] {
            for y in 0..out_dims[1] {
                for x in 0..out_dims[2] {
                    let o = [z, y, x];
                    let mut src = o;
                    src[a] = cur_dims[a] - 1 - o[b];
                    src[b] = o[a];
                    out[o[0] * so[0] + o[1] * so[1] + o[2]] =
                        cur[src[0] * si[0] + src[1] * si[1] + src[2]];
                }
            }
        }
        cur = out;
        cur_dims = out_dims;
    }
    (cur, cur_dims)
}
