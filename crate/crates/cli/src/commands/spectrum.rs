use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use lieb_towers::io::report_json;
use lieb_towers::spectra::{
    all_records, analyze_ep_sector, analyze_sectors, extract_tower, ground_state_report,
    GroundStateReport, SectorSpectrum, SpectrumRecord, TowerKind, TowerReport, TowerScope,
};

use super::{analysis_options, load_model, selected_sectors};
use crate::args::{RunConfig, Selector};
use crate::failure::Failure;
use crate::table::spectrum_table;
use crate::Output;

#[derive(Serialize)]
struct SpectrumBody {
    n_sites: usize,
    electron_phonon: bool,
    partial: bool,
    ground: GroundStateReport,
    towers: Vec<TowerReport>,
    records: Vec<SpectrumRecord>,
}

pub fn run(cfg: &RunConfig) -> Result<Output, Failure> {
    let model = load_model(cfg)?;
    let lat = &model.lattice;
    let n = lat.n_sites();
    let sectors = selected_sectors(cfg.selector, n)?;
    let opts = analysis_options(cfg);

    let spectra: Vec<SectorSpectrum> = match &model.phonons {
        Some(ph) => {
            let ph = cfg.n_max.map_or_else(|| ph.clone(), |k| ph.with_n_max(k));
            sectors
                .par_iter()
                .map(|&s| analyze_ep_sector(lat, &ph, s, &opts, cfg.ep_cap))
                .collect::<lieb_towers::Result<_>>()?
        }
        None => analyze_sectors(lat, &sectors, &opts)?,
    };
    let records = all_records(&spectra);

    let pseudospin = records.iter().any(|r| r.j.is_some());
    let scopes: Vec<TowerScope> = match cfg.selector {
        Selector::Sector(s) => vec![TowerScope::Sector(s)],
        Selector::Filling(n_e) => vec![TowerScope::Filling(n_e)],
        Selector::All => {
            let fillings: BTreeSet<usize> = sectors.iter().map(|s| s.n_electrons()).collect();
            fillings.into_iter().map(TowerScope::Filling).collect()
        }
    };
    let mut towers = Vec::new();
    for scope in scopes {
        towers.push(extract_tower(&records, TowerKind::Spin, scope, cfg.deg_tol));
        if pseudospin {
            towers.push(extract_tower(
                &records,
                TowerKind::Pseudospin,
                scope,
                cfg.deg_tol,
            ));
        }
    }

    let body = SpectrumBody {
        n_sites: n,
        electron_phonon: model.phonons.is_some(),
        partial: spectra.iter().any(SectorSpectrum::partial),
        ground: ground_state_report(&spectra, cfg.deg_tol),
        towers,
        records,
    };
    Ok(Output {
        json: report_json("spectrum", &body),
        table: spectrum_table(&body.records),
        pass: true,
    })
}
