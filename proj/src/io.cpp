#include "plnet/io.hpp"
#include "plnet/metrics.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace plnet {

namespace {

constexpr double edge_threshold = 1e-8;

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return "";
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string unquote(std::string s) {
    s = trim(s);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        s = s.substr(1, s.size() - 2);
    }
    return s;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, sep)) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == sep) {
        fields.emplace_back();
    }
    return fields;
}

bool parse_double(const std::string& text, double& out) {
    const std::string t = trim(text);
    if (t.empty()) {
        return false;
    }
    const char* first = t.data();
    if (*first == '+') {
        ++first;
    }
    auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), out);
    return ec == std::errc() && ptr == t.data() + t.size();
}

double parse_count(const std::string& text, const std::string& where) {
    double v = 0;
    if (!parse_double(text, v) || !std::isfinite(v)) {
        throw InputError("invalid number '" + trim(text) + "' at " + where);
    }
    if (std::floor(v) != v) {
        throw InputError("non-integer count at " + where);
    }
    if (v < 0) {
        throw InputError("negative count at " + where);
    }
    return v;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write " + path);
    }
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open " + path);
    }
    return in;
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::vector<std::string> read_names(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::vector<std::string> names;
    if (!in) {
        return names;
    }
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (!line.empty()) {
            names.push_back(line);
        }
    }
    return names;
}

void write_names(const std::string& path, const std::vector<std::string>& names) {
    std::ofstream out = open_out(path);
    for (const auto& name : names) {
        out << name << '\n';
    }
}

}

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

CountMatrix read_counts_csv(std::istream& in, bool transpose) {
    std::string line;
    if (!std::getline(in, line)) {
        throw InputError("empty CSV file");
    }
    std::vector<std::string> header;
    for (auto& field : split(line, ',')) {
        header.push_back(unquote(field));
    }
    const std::size_t cols = header.size();

    std::vector<std::vector<double> > rows;
    int row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            continue;
        }
        ++row;
        const auto fields = split(line, ',');
        if (fields.size() != cols) {
            throw InputError("row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                             " fields, expected " + std::to_string(cols));
        }
        std::vector<double> values(cols);
        for (std::size_t c = 0; c < cols; ++c) {
            values[c] = parse_count(fields[c], "row " + std::to_string(row) + " col " + std::to_string(c + 1));
        }
        rows.push_back(std::move(values));
    }

    Matrix grid(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            grid(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }

    CountMatrix out;
    if (transpose) {
        out.counts = grid.transpose();
        out.cell_ids = std::move(header);
    } else {
        out.counts = std::move(grid);
        out.gene_names = std::move(header);
    }
    out.lib_sizes = Vector::Ones(out.counts.rows());
    return out;
}

CountMatrix read_counts_mtx(std::istream& in, const std::vector<std::string>& gene_names,
                            const std::vector<std::string>& cell_ids, bool transpose) {
    std::string line;
    int line_no = 1;
    if (!std::getline(in, line)) {
        throw InputError("empty MatrixMarket file");
    }
    std::istringstream banner(line);
    std::string tag, object, format, field, symmetry;
    banner >> tag >> object >> format >> field >> symmetry;
    for (auto* s : { &object, &format, &field, &symmetry }) {
        for (auto& ch : *s) {
            ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        }
    }
    if (tag != "%%MatrixMarket" || object != "matrix" || format != "coordinate") {
        throw InputError("line 1: expected a '%%MatrixMarket matrix coordinate' header");
    }
    if (field != "integer" && field != "real") {
        throw InputError("line 1: unsupported field '" + field + "', expected integer");
    }
    if (symmetry != "general") {
        throw InputError("line 1: unsupported symmetry '" + symmetry + "', expected general");
    }

    long long rows = -1, cols = -1, nnz = -1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '%') {
            continue;
        }
        std::istringstream ss(t);
        std::string extra;
        if (!(ss >> rows >> cols >> nnz) || (ss >> extra) || rows < 0 || cols < 0 || nnz < 0) {
            throw InputError("line " + std::to_string(line_no) + ": malformed size line");
        }
        break;
    }
    if (rows < 0) {
        throw InputError("missing MatrixMarket size line");
    }

    Matrix grid = Matrix::Zero(rows, cols);
    std::map<std::pair<long long, long long>, int> seen;
    long long read = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '%') {
            continue;
        }
        const std::string where = "line " + std::to_string(line_no);
        std::istringstream ss(t);
        long long i = 0, j = 0;
        std::string value, extra;
        if (!(ss >> i >> j >> value) || (ss >> extra)) {
            throw InputError(where + ": expected 'row col value'");
        }
        if (i < 1 || i > rows || j < 1 || j > cols) {
            throw InputError(where + ": entry (" + std::to_string(i) + "," + std::to_string(j) +
                             ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
        }
        auto [it, fresh] = seen.emplace(std::make_pair(i, j), line_no);
        if (!fresh) {
            throw InputError(where + ": duplicate entry (" + std::to_string(i) + "," + std::to_string(j) +
                             "), first on line " + std::to_string(it->second));
        }
        grid(i - 1, j - 1) = parse_count(value, where + " (row " + std::to_string(i) + " col " + std::to_string(j) + ")");
        ++read;
    }
    if (read != nnz) {
        throw InputError("size line declares " + std::to_string(nnz) + " entries but " + std::to_string(read) +
                         " were read");
    }

    CountMatrix out;
    out.counts = transpose ? Matrix(grid.transpose()) : grid;
    if (!gene_names.empty() && static_cast<Eigen::Index>(gene_names.size()) != out.n_genes()) {
        throw InputError("genes sidecar lists " + std::to_string(gene_names.size()) + " names but the matrix has " +
                         std::to_string(out.n_genes()) + " genes");
    }
    if (!cell_ids.empty() && static_cast<Eigen::Index>(cell_ids.size()) != out.n_cells()) {
        throw InputError("cells sidecar lists " + std::to_string(cell_ids.size()) + " ids but the matrix has " +
                         std::to_string(out.n_cells()) + " cells");
    }
    out.gene_names = gene_names;
    out.cell_ids = cell_ids;
    out.lib_sizes = Vector::Ones(out.n_cells());
    return out;
}

CountMatrix read_counts(const std::string& path, bool transpose) {
    std::ifstream in = open_in(path);
    try {
        if (ends_with(path, ".csv")) {
            return read_counts_csv(in, transpose);
        }
        if (ends_with(path, ".mtx")) {
            const std::string stem = path.substr(0, path.size() - 4);
            return read_counts_mtx(in, read_names(stem + ".genes.txt"), read_names(stem + ".cells.txt"), transpose);
        }
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
    throw InputError(path + ": unknown count format, expected .csv or .mtx");
}

std::vector<std::string> gene_labels(const CountMatrix& data) {
    if (!data.gene_names.empty()) {
        return data.gene_names;
    }
    std::vector<std::string> names;
    for (Eigen::Index j = 0; j < data.n_genes(); ++j) {
        names.push_back("g" + std::to_string(j + 1));
    }
    return names;
}

std::vector<std::string> cell_labels(const CountMatrix& data) {
    if (!data.cell_ids.empty()) {
        return data.cell_ids;
    }
    std::vector<std::string> ids;
    for (Eigen::Index i = 0; i < data.n_cells(); ++i) {
        ids.push_back("c" + std::to_string(i + 1));
    }
    return ids;
}

void write_counts_csv(const std::string& path, const CountMatrix& data) {
    std::ofstream out = open_out(path);
    const auto names = gene_labels(data);
    for (std::size_t j = 0; j < names.size(); ++j) {
        out << (j ? "," : "") << names[j];
    }
    out << '\n';
    for (Eigen::Index i = 0; i < data.n_cells(); ++i) {
        for (Eigen::Index j = 0; j < data.n_genes(); ++j) {
            out << (j ? "," : "") << static_cast<long long>(data.counts(i, j));
        }
        out << '\n';
    }
}

void write_counts_mtx(const std::string& path, const CountMatrix& data) {
    if (!ends_with(path, ".mtx")) {
        throw std::invalid_argument("MatrixMarket output path must end in .mtx");
    }
    std::ofstream out = open_out(path);
    const long long nnz = (data.counts.array() != 0).count();
    out << "%%MatrixMarket matrix coordinate integer general\n";
    out << data.n_cells() << ' ' << data.n_genes() << ' ' << nnz << '\n';
    for (Eigen::Index j = 0; j < data.n_genes(); ++j) {
        for (Eigen::Index i = 0; i < data.n_cells(); ++i) {
            if (data.counts(i, j) != 0) {
                out << i + 1 << ' ' << j + 1 << ' ' << static_cast<long long>(data.counts(i, j)) << '\n';
            }
        }
    }
    const std::string stem = path.substr(0, path.size() - 4);
    write_names(stem + ".genes.txt", gene_labels(data));
    write_names(stem + ".cells.txt", cell_labels(data));
}

void write_lib_sizes(const std::string& path, const CountMatrix& data) {
    std::ofstream out = open_out(path);
    const auto ids = cell_labels(data);
    out << "cell_id,S\n";
    for (Eigen::Index i = 0; i < data.n_cells(); ++i) {
        out << ids[i] << ',' << format_double(data.lib_sizes(i)) << '\n';
    }
}

void read_lib_sizes(const std::string& path, CountMatrix& data) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) {
        throw InputError(path + ": empty library-size file");
    }
    std::vector<std::string> ids;
    std::vector<double> sizes;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split(line, ',');
        double s = 0;
        if (fields.size() != 2 || !parse_double(fields[1], s)) {
            throw InputError(path + ": line " + std::to_string(line_no) + ": expected 'cell_id,S'");
        }
        if (!(s > 0) || !std::isfinite(s)) {
            throw InputError(path + ": line " + std::to_string(line_no) + ": library size must be positive");
        }
        ids.push_back(unquote(fields[0]));
        sizes.push_back(s);
    }
    if (static_cast<Eigen::Index>(sizes.size()) != data.n_cells()) {
        throw InputError(path + ": " + std::to_string(sizes.size()) + " library sizes for " +
                         std::to_string(data.n_cells()) + " cells");
    }
    if (!data.cell_ids.empty()) {
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (ids[i] != data.cell_ids[i]) {
                throw InputError(path + ": cell id '" + ids[i] + "' on line " + std::to_string(i + 2) +
                                 " does not match '" + data.cell_ids[i] + "'");
            }
        }
    } else {
        data.cell_ids = ids;
    }
    data.lib_sizes = Eigen::Map<const Vector>(sizes.data(), static_cast<Eigen::Index>(sizes.size()));
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
    std::ofstream out = open_out(path);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out << (j ? "," : "") << format_double(m(i, j));
        }
        out << '\n';
    }
}

Matrix read_matrix_csv(const std::string& path) {
    std::ifstream in = open_in(path);
    std::vector<std::vector<double> > rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split(line, ',');
        std::vector<double> values(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (!parse_double(fields[c], values[c])) {
                throw InputError(path + ": invalid number at line " + std::to_string(line_no) + " col " +
                                 std::to_string(c + 1));
            }
        }
        if (!rows.empty() && values.size() != rows.front().size()) {
            throw InputError(path + ": line " + std::to_string(line_no) + " has " + std::to_string(values.size()) +
                             " fields, expected " + std::to_string(rows.front().size()));
        }
        rows.push_back(std::move(values));
    }
    if (rows.empty()) {
        throw InputError(path + ": empty matrix file");
    }
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            m(i, j) = rows[i][j];
        }
    }
    return m;
}

void write_edges_tsv(const std::string& path, const Matrix& theta, const std::vector<std::string>& gene_names) {
    if (static_cast<Eigen::Index>(gene_names.size()) != theta.rows()) {
        throw std::invalid_argument("gene names do not match the precision matrix");
    }
    PrecisionEstimate est;
    est.theta = theta;
    const Matrix pc = partial_corr(est);
    std::ofstream out = open_out(path);
    out << "gene_i\tgene_j\ttheta_ij\tpartial_corr\n";
    for (Eigen::Index i = 0; i < theta.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < theta.cols(); ++j) {
            if (std::abs(theta(i, j)) > edge_threshold) {
                out << gene_names[i] << '\t' << gene_names[j] << '\t' << format_double(theta(i, j)) << '\t'
                    << format_double(pc(i, j)) << '\n';
            }
        }
    }
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out = open_out(path);
    out << content;
    if (!out) {
        throw InputError("cannot write " + path);
    }
}

std::string read_text(const std::string& path) {
    std::ifstream in = open_in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}
