#include "fedavo/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "fedavo/rng.hpp"

namespace fedavo {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::uint32_t read_u32_be(std::istream& in) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    if (!in) throw std::runtime_error("unexpected end of data");
    return (std::uint32_t(bytes[0]) << 24) | (std::uint32_t(bytes[1]) << 16) |
           (std::uint32_t(bytes[2]) << 8) | std::uint32_t(bytes[3]);
}

void write_u32_be(std::ostream& out, std::uint32_t v) {
    const unsigned char bytes[4] = {
        static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
        static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    return in;
}

} // namespace

void Dataset::validate() const {
    if (inputs.rows != labels.size())
        throw std::invalid_argument("dataset: images/labels disagree");
    if (num_classes < 1)
        throw std::invalid_argument("dataset: need at least one class");
    for (std::int32_t y : labels)
        if (y < 0 || y >= num_classes)
            throw std::invalid_argument("dataset: label out of range");
    for (double v : inputs.data)
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("dataset: input outside [0,1]");
}

Dataset load_idx(const std::string& images_path,
                 const std::string& labels_path) {
    auto img_in = open_input(images_path);
    if (read_u32_be(img_in) != kImagesMagic)
        throw std::runtime_error("not an IDX file: " + images_path);
    const std::uint32_t n = read_u32_be(img_in);
    const std::uint32_t rows = read_u32_be(img_in);
    const std::uint32_t cols = read_u32_be(img_in);
    const std::size_t dim = std::size_t(rows) * cols;

    Dataset ds;
    ds.inputs = Matrix(n, dim);
    std::vector<unsigned char> buf(dim);
    for (std::uint32_t i = 0; i < n; ++i) {
        img_in.read(reinterpret_cast<char*>(buf.data()),
                    static_cast<std::streamsize>(dim));
        if (!img_in) throw std::runtime_error("unexpected end of data");
        double* out = ds.inputs.row(i);
        for (std::size_t j = 0; j < dim; ++j)
            out[j] = static_cast<double>(buf[j]) / 255.0;
    }

    auto lbl_in = open_input(labels_path);
    if (read_u32_be(lbl_in) != kLabelsMagic)
        throw std::runtime_error("not an IDX file: " + labels_path);
    const std::uint32_t n_labels = read_u32_be(lbl_in);
    if (n_labels != n) throw std::runtime_error("images/labels disagree");
    ds.labels.resize(n_labels);
    std::int32_t max_label = 0;
    for (std::uint32_t i = 0; i < n_labels; ++i) {
        unsigned char y;
        lbl_in.read(reinterpret_cast<char*>(&y), 1);
        if (!lbl_in) throw std::runtime_error("unexpected end of data");
        ds.labels[i] = y;
        max_label = std::max(max_label, ds.labels[i]);
    }
    ds.num_classes = max_label + 1;
    ds.validate();
    return ds;
}

void write_idx_images(const std::string& path, const Matrix& inputs,
                      std::uint32_t img_rows, std::uint32_t img_cols) {
    if (std::size_t(img_rows) * img_cols != inputs.cols)
        throw std::invalid_argument("idx writer: image shape mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file: " + path);
    write_u32_be(out, kImagesMagic);
    write_u32_be(out, static_cast<std::uint32_t>(inputs.rows));
    write_u32_be(out, img_rows);
    write_u32_be(out, img_cols);
    for (double v : inputs.data) {
        const auto byte = static_cast<unsigned char>(
            std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
        out.write(reinterpret_cast<const char*>(&byte), 1);
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_idx_labels(const std::string& path,
                      const std::vector<std::int32_t>& labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file: " + path);
    write_u32_be(out, kLabelsMagic);
    write_u32_be(out, static_cast<std::uint32_t>(labels.size()));
    for (std::int32_t y : labels) {
        const auto byte = static_cast<unsigned char>(y);
        out.write(reinterpret_cast<const char*>(&byte), 1);
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

Dataset synthetic_classification(std::size_t n, std::size_t classes,
                                 std::size_t dims, double spread,
                                 std::uint64_t seed) {
    if (classes < 2) throw std::invalid_argument("synthetic: need >= 2 classes");
    if (dims < 2) throw std::invalid_argument("synthetic: need >= 2 dims");
    if (n < classes) throw std::invalid_argument("synthetic: need n >= classes");

    // Vertex scale fixed well above unit noise so that spread directly
    // controls class overlap.
    constexpr double kVertexScale = 3.0;
    Rng rng(seed);

    Matrix centers(classes, dims, 0.0);
    for (std::size_t c = 0; c < classes; ++c) {
        centers.at(c, c % dims) = kVertexScale;
        for (std::size_t j = 0; j < dims; ++j)
            centers.at(c, j) += rng.uniform(-0.1 * kVertexScale,
                                            0.1 * kVertexScale);
    }

    Dataset ds;
    ds.inputs = Matrix(n, dims);
    ds.labels.resize(n);
    ds.num_classes = static_cast<std::int32_t>(classes);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = i % classes;
        ds.labels[i] = static_cast<std::int32_t>(c);
        double* row = ds.inputs.row(i);
        for (std::size_t j = 0; j < dims; ++j)
            row[j] = centers.at(c, j) + spread * rng.normal();
    }

    // Min-max normalize the whole matrix into [0,1]; a single affine map
    // preserves the class geometry.
    double lo = ds.inputs.data[0], hi = ds.inputs.data[0];
    for (double v : ds.inputs.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi > lo ? hi - lo : 1.0;
    for (double& v : ds.inputs.data) v = (v - lo) / span;

    ds.validate();
    return ds;
}

Dataset subsample(const Dataset& ds, std::size_t n, bool stratified,
                  std::uint64_t seed) {
    if (n > ds.size())
        throw std::invalid_argument("subsample: n exceeds dataset size");
    Rng rng(seed);

    std::vector<std::size_t> chosen;
    chosen.reserve(n);
    if (!stratified) {
        std::vector<std::size_t> indices(ds.size());
        std::iota(indices.begin(), indices.end(), std::size_t{0});
        rng.shuffle(indices);
        chosen.assign(indices.begin(), indices.begin() + n);
    } else {
        const std::size_t m = static_cast<std::size_t>(ds.num_classes);
        std::vector<std::vector<std::size_t>> pools(m);
        for (std::size_t i = 0; i < ds.size(); ++i)
            pools[static_cast<std::size_t>(ds.labels[i])].push_back(i);

        // Per-class quota: floor share, remainder by largest fraction
        // (ties toward the lower class index).
        std::vector<std::size_t> quota(m);
        std::vector<std::pair<double, std::size_t>> fractional(m);
        std::size_t assigned = 0;
        for (std::size_t c = 0; c < m; ++c) {
            const double exact = static_cast<double>(n) * pools[c].size() /
                                 static_cast<double>(ds.size());
            quota[c] = static_cast<std::size_t>(exact);
            fractional[c] = {exact - static_cast<double>(quota[c]), c};
            assigned += quota[c];
        }
        std::sort(fractional.begin(), fractional.end(),
                  [](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return a.second < b.second;
                  });
        for (std::size_t k = 0; assigned < n; ++k, ++assigned)
            ++quota[fractional[k % m].second];

        for (std::size_t c = 0; c < m; ++c) {
            if (quota[c] > pools[c].size())
                throw std::invalid_argument("subsample: class exhausted");
            rng.shuffle(pools[c]);
            chosen.insert(chosen.end(), pools[c].begin(),
                          pools[c].begin() + quota[c]);
        }
        rng.shuffle(chosen);
    }

    Dataset out;
    out.inputs = Matrix(n, ds.inputs.cols);
    out.labels.resize(n);
    out.num_classes = ds.num_classes;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t src = chosen[i];
        std::copy_n(ds.inputs.row(src), ds.inputs.cols, out.inputs.row(i));
        out.labels[i] = ds.labels[src];
    }
    return out;
}

} // namespace fedavo
