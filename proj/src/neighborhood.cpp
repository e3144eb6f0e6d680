#include "leakaudit/neighborhood.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "leakaudit/errors.hpp"

namespace leakaudit {

using nlohmann::json;

EmbeddingProvider EmbeddingProvider::char_ngram_hash(int n, int dim) {
    if (dim < 2) throw Error("embedding dimension must be >= 2");
    if (n < 1) throw Error("n-gram size must be >= 1");
    EmbeddingProvider p;
    p.source = Source::kCharNgramHash;
    p.dimension = dim;
    p.ngram = n;
    return p;
}

EmbeddingProvider EmbeddingProvider::word_vector_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open word-vector table: " + path);
    EmbeddingProvider p;
    p.source = Source::kWordVectorTable;
    p.dimension = 0;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string token;
        ss >> token;
        std::vector<double> vals;
        double v;
        while (ss >> v) vals.push_back(v);
        if (vals.empty()) throw Error(path + ":" + std::to_string(lineno) + ": no vector values");
        if (p.dimension == 0) {
            p.dimension = static_cast<int>(vals.size());
            if (p.dimension < 2) throw Error("word-vector table dimension must be >= 2");
        } else if (static_cast<int>(vals.size()) != p.dimension) {
            throw Error(path + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(p.dimension) + " floats, got " + std::to_string(vals.size()));
        }
        Eigen::VectorXd vec(p.dimension);
        for (int i = 0; i < p.dimension; ++i) vec[i] = vals[static_cast<size_t>(i)];
        p.table.emplace(std::move(token), std::move(vec));
    }
    if (p.table.empty()) throw Error("word-vector table is empty: " + path);
    return p;
}

namespace {

// Sub-tokens of a secret value: runs of letters, split on separators and
// digits, lowercased.
std::vector<std::string> sub_tokens(const std::string& value) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : value) {
        const unsigned char u = static_cast<unsigned char>(c);
        if (std::isalpha(u)) {
            current.push_back(static_cast<char>(std::tolower(u)));
        } else {
            if (!current.empty()) tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

} // namespace

SecretEmbedding embed_secret(const SecretRecord& secret, const EmbeddingProvider& provider) {
    if (secret.value.empty()) throw Error("embed_secret: empty secret value");
    SecretEmbedding out;
    out.secret_id = secret.id;
    out.vector = Eigen::VectorXd::Zero(provider.dimension);

    if (provider.source == EmbeddingProvider::Source::kCharNgramHash) {
        const std::string& v = secret.value;
        const size_t n = static_cast<size_t>(provider.ngram);
        if (v.size() <= n) {
            out.vector[static_cast<int>(fnv1a64(v) % static_cast<uint64_t>(provider.dimension))] += 1.0;
        } else {
            for (size_t i = 0; i + n <= v.size(); ++i) {
                const uint64_t h = fnv1a64(std::string_view(v).substr(i, n));
                out.vector[static_cast<int>(h % static_cast<uint64_t>(provider.dimension))] += 1.0;
            }
        }
        const double norm = out.vector.norm();
        if (norm > 0.0) out.vector /= norm;
        out.coverage = 1.0;
        return out;
    }

    const auto tokens = sub_tokens(secret.value);
    size_t found = 0;
    for (const auto& token : tokens) {
        const auto it = provider.table.find(token);
        if (it != provider.table.end()) {
            out.vector += it->second;
            ++found;
        }
    }
    if (found > 0) out.vector /= static_cast<double>(found);
    out.coverage = tokens.empty() ? 0.0 : static_cast<double>(found) / static_cast<double>(tokens.size());
    return out;
}

namespace {

Eigen::VectorXd normalized(const Eigen::VectorXd& v) {
    const double n = v.norm();
    return n > 0.0 ? Eigen::VectorXd(v / n) : v;
}

double mean_nn_distance(const std::vector<SecretEmbedding>& from,
                        const std::vector<SecretEmbedding>& to) {
    double total = 0.0;
    for (const auto& f : from) {
        const Eigen::VectorXd fv = normalized(f.vector);
        double best = std::numeric_limits<double>::infinity();
        for (const auto& t : to) {
            const double d = (fv - normalized(t.vector)).norm();
            best = std::min(best, d);
        }
        total += best;
    }
    return total / static_cast<double>(from.size());
}

} // namespace

json NeighborhoodReport::to_json() const {
    return {
        {"schema", "neighborhood_report/v1"},
        {"onion_to_extracted_nn", onion_to_extracted_nn},
        {"safe_to_extracted_nn", safe_to_extracted_nn},
        {"proximity_ratio", proximity_ratio},
    };
}

json SecretEmbedding::to_json() const {
    std::vector<double> vals(vector.data(), vector.data() + vector.size());
    return {{"schema", "embedding/v1"}, {"secret_id", secret_id}, {"vector", vals},
            {"coverage", coverage}};
}

NeighborhoodReport neighborhood_stats(const std::vector<SecretEmbedding>& extracted,
                                      const std::vector<SecretEmbedding>& onion,
                                      const std::vector<SecretEmbedding>& safe_sample) {
    if (extracted.empty() || onion.empty() || safe_sample.empty()) {
        throw Error("neighborhood_stats: all three groups must be non-empty");
    }
    NeighborhoodReport r;
    r.onion_to_extracted_nn = mean_nn_distance(onion, extracted);
    r.safe_to_extracted_nn = mean_nn_distance(safe_sample, extracted);
    r.proximity_ratio = r.safe_to_extracted_nn > 0.0
                            ? r.onion_to_extracted_nn / r.safe_to_extracted_nn
                            : std::numeric_limits<double>::infinity();
    if (r.onion_to_extracted_nn == 0.0 && r.safe_to_extracted_nn == 0.0) r.proximity_ratio = 1.0;
    return r;
}

Projection2d project_2d(const std::vector<Eigen::VectorXd>& embeddings) {
    if (embeddings.size() < 2) throw Error("project_2d: need at least 2 vectors");
    const int dim = static_cast<int>(embeddings.front().size());
    for (const auto& v : embeddings) {
        if (v.size() != dim) throw Error("project_2d: inconsistent dimensions");
    }
    const int n = static_cast<int>(embeddings.size());

    Eigen::MatrixXd x(n, dim);
    for (int i = 0; i < n; ++i) x.row(i) = embeddings[static_cast<size_t>(i)];
    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;

    Projection2d out;
    const Eigen::MatrixXd cov = x.transpose() * x;
    if (cov.norm() == 0.0) {
        out.degenerate = true;
        out.points.assign(static_cast<size_t>(n), Eigen::Vector2d::Zero());
        return out;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw Error("project_2d: eigendecomposition failed");
    // Eigen returns eigenvalues ascending; the last two columns are the top
    // components.
    Eigen::MatrixXd components = Eigen::MatrixXd::Zero(dim, 2);
    components.col(0) = solver.eigenvectors().col(dim - 1);
    if (dim >= 2) components.col(1) = solver.eigenvectors().col(dim - 2);

    // Deterministic sign: flip each component so its largest-magnitude
    // coordinate is positive.
    for (int c = 0; c < 2; ++c) {
        int arg = 0;
        components.col(c).cwiseAbs().maxCoeff(&arg);
        if (components(arg, c) < 0.0) components.col(c) = -components.col(c);
    }

    const Eigen::MatrixXd proj = x * components;
    out.points.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) out.points.emplace_back(proj(i, 0), proj(i, 1));
    return out;
}

} // namespace leakaudit
