use std::io::Write;

use super::BlockTree;
use crate::error::Result;

/// Writes one `block_id parent_id origin type_id mine_time chain_score` line per block.
/// Genesis has `-` for its parent, origin and type.
pub fn write_tree<W: Write>(tree: &BlockTree, mut out: W) -> Result<()> {
    for b in tree.blocks() {
        let parent = b.parent.map_or_else(|| "-".to_string(), |p| p.to_string());
        let origin = b.origin.map_or("-", |o| o.as_str());
        let type_id = b.type_id.map_or_else(|| "-".to_string(), |t| t.to_string());
        writeln!(out, "{}\t{parent}\t{origin}\t{type_id}\t{:.9}\t{}", b.id, b.mine_time, b.chain_score)?;
    }
    Ok(())
}
