use std::collections::VecDeque;

use proptest::prelude::*;
use sortflow::domain::{is_collision_free, Cell, GridMap, Path};

/// Rows of a random map over `.`, `@`, `T`, `B`.
fn map_text() -> impl Strategy<Value = Vec<String>> {
    (1usize..6, 1usize..6).prop_flat_map(|(h, w)| {
        prop::collection::vec(
            prop::collection::vec(prop::sample::select(vec!['.', '.', '.', '@', 'T', 'B']), w),
            h,
        )
        .prop_map(|rows| rows.into_iter().map(|r| r.into_iter().collect()).collect())
    })
}

/// Breadth-first distances over the character grid, `None` if unreachable.
fn char_bfs(rows: &[String], from: (usize, usize)) -> Vec<Vec<Option<u32>>> {
    let grid: Vec<Vec<char>> = rows.iter().map(|r| r.chars().collect()).collect();
    let (h, w) = (grid.len(), grid[0].len());
    let mut dist = vec![vec![None; w]; h];
    dist[from.0][from.1] = Some(0);
    let mut queue = VecDeque::from([from]);
    while let Some((r, c)) = queue.pop_front() {
        let d = dist[r][c].unwrap();
        let steps = [(r.wrapping_sub(1), c), (r + 1, c), (r, c.wrapping_sub(1)), (r, c + 1)];
        for (nr, nc) in steps {
            if nr < h && nc < w && grid[nr][nc] != '@' && dist[nr][nc].is_none() {
                dist[nr][nc] = Some(d + 1);
                queue.push_back((nr, nc));
            }
        }
    }
    dist
}

proptest! {
    #[test]
    fn parse_accepts_exactly_the_connected_maps(rows in map_text()) {
        let text = rows.join("\n");
        let free: Vec<(usize, usize)> = rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.chars().enumerate().filter(|&(_, ch)| ch != '@').map(move |(c, _)| (r, c)))
            .collect();
        let connected = match free.first() {
            None => true,
            Some(&first) => {
                let d = char_bfs(&rows, first);
                free.iter().all(|&(r, c)| d[r][c].is_some())
            }
        };
        let parsed = GridMap::parse(&text);
        prop_assert_eq!(parsed.is_ok(), connected);
        if let Ok(map) = parsed {
            prop_assert_eq!(GridMap::parse(&map.to_string()).unwrap(), map.clone());
            let targets = rows.iter().flat_map(|r| r.chars()).filter(|&c| c == 'T').count();
            prop_assert_eq!(map.station_count(), targets);
            for &(r, c) in free.iter().take(3) {
                let expected = char_bfs(&rows, (r, c));
                let got = map.distances_from(map.cell(r, c).unwrap());
                for (cell, d) in got.iter().enumerate() {
                    let (rr, cc) = map.coords(Cell(cell));
                    prop_assert_eq!(*d, expected[rr][cc]);
                }
            }
        }
    }

    #[test]
    fn neighbors_are_adjacent_free_cells(rows in map_text()) {
        if let Ok(map) = GridMap::parse(&rows.join("\n")) {
            for c in map.traversable_cells() {
                let (r, col) = map.coords(c);
                for n in map.neighbors(c) {
                    let (nr, nc) = map.coords(n);
                    prop_assert!(map.is_traversable(n));
                    prop_assert_eq!(r.abs_diff(nr) + col.abs_diff(nc), 1);
                }
            }
        }
    }

    #[test]
    fn collision_check_matches_pairwise_scan(
        moves in prop::collection::vec((0usize..3, prop::collection::vec(0usize..6, 1..6)), 1..4)
    ) {
        // cells on a 1x6 corridor; paths need not be connected for this check
        let paths: Vec<Path> = moves
            .iter()
            .enumerate()
            .map(|(i, (start, cells))| Path::new(i, *start as u32, cells.iter().map(|&c| Cell(c)).collect()))
            .collect();
        let at = |p: &Path, t: i64| -> Option<usize> {
            let i = t - p.start as i64;
            (i >= 0 && (i as usize) < p.cells.len()).then(|| p.cells[i as usize].0)
        };
        let mut clash = false;
        for a in 0..paths.len() {
            for b in a + 1..paths.len() {
                for t in 0..12 {
                    let (pa, pb) = (at(&paths[a], t), at(&paths[b], t));
                    if pa.is_some() && pa == pb {
                        clash = true;
                    }
                    let (na, nb) = (at(&paths[a], t + 1), at(&paths[b], t + 1));
                    if pa.is_some() && pb.is_some() && na.is_some() && nb.is_some() && pa == nb && pb == na && pa != pb {
                        clash = true;
                    }
                }
            }
        }
        prop_assert_eq!(is_collision_free(&paths), !clash);
    }
}
