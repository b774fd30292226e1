#ifndef PLNET_IO_HPP
#define PLNET_IO_HPP

#include "types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace plnet {

/// Shortest text that still round-trips: `%.17g`.
std::string format_double(double x);

/**
 * Reads a count matrix, format chosen by extension.
 *
 * - `.csv`: header of gene names, then one row of integer counts per cell.
 * - `.mtx`: MatrixMarket coordinate matrix with cells as rows and genes as
 *   columns. Optional sidecars `<stem>.genes.txt` and `<stem>.cells.txt` hold
 *   one name per line.
 *
 * With `transpose` the file is read as genes by cells instead: a CSV header
 * then lists cell ids and each row is one gene; an MTX file has genes as rows.
 * Library sizes are left at 1 for the caller to fill.
 *
 * Throws `InputError` with line or row/column coordinates.
 */
CountMatrix read_counts(const std::string& path, bool transpose = false);
CountMatrix read_counts_csv(std::istream& in, bool transpose = false);
CountMatrix read_counts_mtx(std::istream& in, const std::vector<std::string>& gene_names,
                            const std::vector<std::string>& cell_ids, bool transpose = false);

void write_counts_csv(const std::string& path, const CountMatrix& data);
/// Writes `path` plus the `.genes.txt` / `.cells.txt` sidecars next to it.
void write_counts_mtx(const std::string& path, const CountMatrix& data);

/// `cell_id,S` with a header row.
void write_lib_sizes(const std::string& path, const CountMatrix& data);

/**
 * Reads a `cell_id,S` file into `data.lib_sizes`. Adopts the ids when `data`
 * has none, otherwise requires them to match in order.
 */
void read_lib_sizes(const std::string& path, CountMatrix& data);

/// Dense matrix, comma separated, no header.
void write_matrix_csv(const std::string& path, const Matrix& m);
Matrix read_matrix_csv(const std::string& path);

/// Upper-triangle nonzeros (|theta_ij| > 1e-8) as `gene_i, gene_j, theta_ij, partial_corr`.
void write_edges_tsv(const std::string& path, const Matrix& theta, const std::vector<std::string>& gene_names);

/// Default names `g1..gp` / `c1..cn` when the data carries none.
std::vector<std::string> gene_labels(const CountMatrix& data);
std::vector<std::string> cell_labels(const CountMatrix& data);

void write_text(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

}

#endif
