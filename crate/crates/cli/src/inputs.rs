//! Game and PTM description files.

use serde::{Deserialize, Serialize};

use gftpl::game::{Game, Mode};
use gftpl::oracle::WeightedDataset;
use gftpl::ptm::{binary_rep_ptm, small_y_ptm, transductive_ptm, Ptm};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GameFile {
    /// `rows[k][j]`: value of expert `k` under action `j`.
    Matrix {
        rows: Vec<Vec<f64>>,
        #[serde(default)]
        mode: Mode,
    },
    /// `predictions[k][w]`: label classifier `k` assigns to feature `w`.
    Transductive { predictions: Vec<Vec<bool>> },
}

impl GameFile {
    pub fn build(&self) -> Result<Game, CliError> {
        Ok(match self {
            GameFile::Matrix { rows, mode } => Game::matrix_with_mode(rows.clone(), *mode)?,
            GameFile::Transductive { predictions } => Game::transductive(predictions.clone())?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetItem {
    pub weight: f64,
    /// Index into the game's action list.
    pub action: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PtmFile {
    Binary,
    SmallY,
    Transductive,
    Custom {
        rows: Vec<Vec<f64>>,
        /// One dataset per column.
        #[serde(default)]
        datasets: Option<Vec<Vec<DatasetItem>>>,
        #[serde(default)]
        gamma: Option<f64>,
    },
}

impl PtmFile {
    pub fn build(&self, game: &Game) -> Result<Ptm, CliError> {
        Ok(match self {
            PtmFile::Binary => binary_rep_ptm(game.experts())?,
            PtmFile::SmallY => small_y_ptm(game)?,
            PtmFile::Transductive => transductive_ptm(game)?,
            PtmFile::Custom { rows, datasets, gamma } => {
                let mut ptm = Ptm::new(rows.clone())?;
                if let Some(sets) = datasets {
                    let actions = game
                        .actions()
                        .ok_or_else(|| CliError::Usage("datasets need a game with a finite action list".into()))?;
                    let built = sets
                        .iter()
                        .map(|items| {
                            items
                                .iter()
                                .map(|it| {
                                    actions.get(it.action).map(|y| (it.weight, y.clone())).ok_or_else(|| {
                                        CliError::Usage(format!("dataset action {} outside 0..{}", it.action, actions.len()))
                                    })
                                })
                                .collect::<Result<Vec<_>, _>>()
                                .map(WeightedDataset::new)
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    ptm = ptm.with_datasets(built)?;
                }
                if let Some(g) = gamma {
                    ptm = ptm.with_declared_gamma(*g)?;
                }
                ptm
            }
        })
    }
}
