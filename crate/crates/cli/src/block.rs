use anyhow::{anyhow, bail, Context, Result};
use graphblock::catalog::{build_catalog, published_rows, CatalogEntry, MatchKind};
use graphblock::GraphSpec;

/// Parse a block name: `star-N` (center 1), `path-N`, `ring-N`, `complete-N`,
/// a table row `nN-gK`, or an explicit `N:u-v,u-v,...` edge list.
pub fn resolve_block(spec: &str) -> Result<GraphSpec> {
    let spec = spec.trim();
    if let Some((n, edges)) = spec.split_once(':') {
        let n: usize = n.parse().with_context(|| format!("bad vertex count in '{spec}'"))?;
        let g = GraphSpec::parse_edge_list(n, edges, format!("custom-{n}"))?;
        if !g.is_connected() {
            bail!("block '{spec}' is not connected");
        }
        return Ok(g);
    }
    if let Some(rest) = spec.strip_prefix('n') {
        if let Some((n, k)) = rest.split_once("-g") {
            if let (Ok(n), Ok(k)) = (n.parse::<usize>(), k.parse::<usize>()) {
                return Ok(catalog_rows(n)?
                    .into_iter()
                    .find(|e| e.name() == format!("n{n}-g{k}"))
                    .ok_or_else(|| anyhow!("no table row {k} for n={n}"))?
                    .graph);
            }
        }
    }
    let (kind, n) = spec.rsplit_once('-').ok_or_else(|| anyhow!("unknown block '{spec}'"))?;
    let n: usize = n.parse().with_context(|| format!("bad size in block '{spec}'"))?;
    let g = match kind {
        "star" => GraphSpec::star(n, 1)?,
        "path" => GraphSpec::path(n)?,
        "ring" => GraphSpec::ring(n)?,
        "complete" => GraphSpec::complete(n)?,
        _ => bail!("unknown block family '{kind}'"),
    };
    Ok(g.with_name(spec))
}

/// Catalog entries standing for published rows of size `n`, in row order.
pub fn catalog_rows(n: usize) -> Result<Vec<CatalogEntry>> {
    let rows = published_rows(n);
    if rows.is_empty() {
        bail!("no published rows for n={n}");
    }
    let build = build_catalog(n, &rows)?;
    Ok(build.entries.into_iter().filter(|e| e.match_kind != MatchKind::Unlisted).collect())
}

/// Expand `catalog:N` into every table row of size `N`; other specs resolve
/// to a single block.
pub fn expand_blocks(spec: &str) -> Result<Vec<GraphSpec>> {
    match spec.strip_prefix("catalog:") {
        Some(n) => {
            let n: usize = n.parse().with_context(|| format!("bad size in '{spec}'"))?;
            Ok(catalog_rows(n)?.into_iter().map(|e| e.graph).collect())
        }
        None => Ok(vec![resolve_block(spec)?]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_and_rows() {
        assert_eq!(resolve_block("ring-5").unwrap().edge_count(), 5);
        assert_eq!(resolve_block("star-4").unwrap().name(), "star-4");
        assert_eq!(resolve_block("n4-g1").unwrap().edge_list_string(), "1-2,1-3,1-4");
        assert_eq!(resolve_block("3:1-2,2-3").unwrap().edge_count(), 2);
        assert!(resolve_block("3:1-2").is_err());
        assert!(resolve_block("blob-3").is_err());
        assert!(resolve_block("n4-g9").is_err());
        assert_eq!(expand_blocks("catalog:5").unwrap().len(), 4);
    }
}
