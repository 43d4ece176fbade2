#include "okl/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <set>

#include "okl/linalg.hpp"

namespace okl {

namespace {

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::vector<std::string> split_fields(const std::string& line, const char* seps) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (std::strchr(seps, ch) != nullptr) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool parse_long(const std::string& s, long long& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  return ec == std::errc() && ptr == t.data() + t.size();
}

bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size();
}

struct Triplet {
  long long row;
  long long col;
  double value;
};

bool parse_triplet_line(const std::string& line, Triplet& t) {
  auto fields = split_fields(line, ",\t");
  if (fields.size() == 1) fields = split_fields(line, " ");
  fields.erase(std::remove_if(fields.begin(), fields.end(),
                              [](const std::string& f) { return trim(f).empty(); }),
               fields.end());
  if (fields.size() != 3) return false;
  return parse_long(fields[0], t.row) && parse_long(fields[1], t.col) &&
         parse_double(fields[2], t.value);
}

}  // namespace

Dataset load_triplets(const std::string& path, Index rows_override, Index cols_override) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);

  std::vector<Triplet> triplets;
  std::string line;
  long long max_row = -1, max_col = -1;
  int line_no = 0;
  bool header_allowed = true;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (trim(line).empty()) continue;
    Triplet t{};
    if (!parse_triplet_line(line, t)) {
      if (header_allowed) {
        header_allowed = false;  // a single leading header line is tolerated
        continue;
      }
      throw ParseError(path + ":" + std::to_string(line_no) + ": malformed triplet record");
    }
    header_allowed = false;
    if (t.row < 0 || t.col < 0)
      throw IndexOverflow(path + ":" + std::to_string(line_no) + ": negative index");
    if ((rows_override > 0 && t.row >= rows_override) || (cols_override > 0 && t.col >= cols_override))
      throw IndexOverflow(path + ":" + std::to_string(line_no) + ": index exceeds declared dimensions");
    if (t.row > 100'000'000 || t.col > 100'000'000)
      throw IndexOverflow(path + ":" + std::to_string(line_no) + ": index too large");
    if (!std::isfinite(t.value))
      throw ParseError(path + ":" + std::to_string(line_no) + ": non-finite value");
    max_row = std::max(max_row, t.row);
    max_col = std::max(max_col, t.col);
    triplets.push_back(t);
  }
  if (triplets.empty()) throw EmptyDataset(path + ": no data records");

  const Index rows = rows_override > 0 ? rows_override : static_cast<Index>(max_row + 1);
  const Index cols = cols_override > 0 ? cols_override : static_cast<Index>(max_col + 1);

  Dataset out;
  out.Y = Matrix::Zero(rows, cols);
  std::set<std::pair<long long, long long>> seen;  // (col, row): task-major sorted
  for (const auto& t : triplets) {
    if (!seen.insert({t.col, t.row}).second)
      throw DuplicateEntry(path + ": duplicate entry at (" + std::to_string(t.row) + "," +
                           std::to_string(t.col) + ")");
    out.Y(static_cast<Index>(t.row), static_cast<Index>(t.col)) = t.value;
  }
  out.W = Mask(rows, cols);
  for (const auto& [c, r] : seen) out.W.add(static_cast<Index>(r), static_cast<Index>(c));

  out.inputs.reserve(static_cast<size_t>(rows));
  for (Index i = 0; i < rows; ++i) out.inputs.emplace_back(static_cast<double>(i));
  return out;
}

void save_triplets(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << "row,col,value\n";
  char buf[64];
  for (Index j = 0; j < dataset.W.cols(); ++j)
    for (Index i : dataset.W.rows_of_task(j)) {
      std::snprintf(buf, sizeof(buf), "%.17g", dataset.Y(i, j));
      out << i << "," << j << "," << buf << "\n";
    }
}

void save_dense_csv(const Matrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << "task_" << j;
  out << "\n";
  char buf[64];
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      out << (j ? "," : "") << buf;
    }
    out << "\n";
  }
}

Matrix load_dense_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  bool header_allowed = true;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (trim(line).empty()) continue;
    auto fields = split_fields(line, ",");
    std::vector<double> vals(fields.size());
    bool ok = true;
    for (size_t k = 0; k < fields.size(); ++k) ok = ok && parse_double(fields[k], vals[k]);
    if (!ok) {
      if (header_allowed) {
        header_allowed = false;
        continue;
      }
      throw ParseError(path + ":" + std::to_string(line_no) + ": malformed numeric row");
    }
    header_allowed = false;
    if (!rows.empty() && vals.size() != rows.front().size())
      throw ParseError(path + ":" + std::to_string(line_no) + ": ragged row");
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw EmptyDataset(path + ": no numeric rows");
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < out.rows(); ++i)
    for (Index j = 0; j < out.cols(); ++j) out(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
  return out;
}

namespace {

const std::vector<std::string>& ml1m_genre_alphabet() {
  static const std::vector<std::string> names = {
      "Action", "Adventure", "Animation", "Children's", "Comedy", "Crime", "Documentary",
      "Drama",  "Fantasy",   "Film-Noir", "Horror",     "Musical", "Mystery", "Romance",
      "Sci-Fi", "Thriller",  "War",       "Western"};
  return names;
}

std::vector<std::string> split_double_colon(const std::string& line) {
  std::vector<std::string> parts;
  size_t pos = 0;
  while (true) {
    const size_t next = line.find("::", pos);
    if (next == std::string::npos) {
      parts.push_back(line.substr(pos));
      break;
    }
    parts.push_back(line.substr(pos, next - pos));
    pos = next + 2;
  }
  return parts;
}

std::vector<InputPoint> load_items(const std::string& items_path, MovieLensFormat format,
                                   std::map<int64_t, Index>& id_to_row) {
  std::ifstream in(items_path);
  if (!in) throw ParseError("cannot open " + items_path);
  std::vector<InputPoint> items;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (trim(line).empty()) continue;

    ItemPoint item;
    if (format == MovieLensFormat::ml100k) {
      auto fields = split_fields(line, "|");
      if (fields.size() < 20)
        throw ParseError(items_path + ":" + std::to_string(line_no) + ": expected 19 genre flags");
      long long id = 0;
      if (!parse_long(fields[0], id))
        throw ParseError(items_path + ":" + std::to_string(line_no) + ": bad movie id");
      item.id = id;
      item.genres.resize(19);
      for (size_t k = 0; k < 19; ++k) {
        const std::string& flag = fields[fields.size() - 19 + k];
        if (flag == "0")
          item.genres[k] = 0;
        else if (flag == "1")
          item.genres[k] = 1;
        else
          throw ParseError(items_path + ":" + std::to_string(line_no) + ": genre flag not 0/1");
      }
    } else {
      const auto parts = split_double_colon(line);
      if (parts.size() < 3)
        throw ParseError(items_path + ":" + std::to_string(line_no) + ": expected id::title::genres");
      long long id = 0;
      if (!parse_long(parts[0], id))
        throw ParseError(items_path + ":" + std::to_string(line_no) + ": bad movie id");
      item.id = id;
      const auto& alphabet = ml1m_genre_alphabet();
      item.genres.assign(alphabet.size(), 0);
      for (const auto& name : split_fields(parts.back(), "|")) {
        const std::string g = trim(name);
        if (g.empty()) continue;
        const auto it = std::find(alphabet.begin(), alphabet.end(), g);
        if (it == alphabet.end())
          throw ParseError(items_path + ":" + std::to_string(line_no) + ": unknown genre '" + g + "'");
        item.genres[static_cast<size_t>(it - alphabet.begin())] = 1;
      }
    }

    if (id_to_row.count(item.id) != 0)
      throw DuplicateEntry(items_path + ":" + std::to_string(line_no) + ": repeated movie id");
    id_to_row[item.id] = static_cast<Index>(items.size());
    items.emplace_back(std::move(item));
  }
  if (items.empty()) throw EmptyDataset(items_path + ": no items");
  return items;
}

struct Rating {
  int64_t user;
  int64_t movie;
  double value;
};

std::vector<Rating> load_ratings(const std::string& ratings_path, MovieLensFormat format) {
  std::ifstream in(ratings_path);
  if (!in) throw ParseError("cannot open " + ratings_path);
  std::vector<Rating> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (trim(line).empty()) continue;

    std::vector<std::string> fields;
    if (format == MovieLensFormat::ml100k) {
      fields = split_fields(line, "\t ");
      fields.erase(std::remove_if(fields.begin(), fields.end(),
                                  [](const std::string& f) { return trim(f).empty(); }),
                   fields.end());
    } else {
      fields = split_double_colon(line);
    }
    if (fields.size() < 3)
      throw ParseError(ratings_path + ":" + std::to_string(line_no) + ": expected user, item, rating");
    long long user = 0, movie = 0;
    double rating = 0.0;
    if (!parse_long(fields[0], user) || !parse_long(fields[1], movie) || !parse_double(fields[2], rating))
      throw ParseError(ratings_path + ":" + std::to_string(line_no) + ": malformed rating record");
    if (user < 1) throw ParseError(ratings_path + ":" + std::to_string(line_no) + ": user ids are 1-based");
    out.push_back({user, movie, rating});
  }
  if (out.empty()) throw EmptyDataset(ratings_path + ": no ratings");
  return out;
}

Dataset assemble_movielens(const std::vector<Rating>& ratings, std::vector<InputPoint> items,
                           const std::map<int64_t, Index>& id_to_row, Index tasks) {
  Index max_user = tasks;
  for (const auto& r : ratings) max_user = std::max(max_user, static_cast<Index>(r.user));

  const Index l = static_cast<Index>(items.size());
  Dataset out;
  out.inputs = std::move(items);
  out.Y = Matrix::Zero(l, max_user);
  Matrix w = Matrix::Zero(l, max_user);
  for (const auto& r : ratings) {
    const auto it = id_to_row.find(r.movie);
    if (it == id_to_row.end())
      throw UnknownMovieId("rating references movie id " + std::to_string(r.movie) +
                           " absent from the items file");
    const Index row = it->second;
    const Index col = static_cast<Index>(r.user - 1);
    if (w(row, col) != 0.0)
      throw DuplicateEntry("duplicate rating for movie " + std::to_string(r.movie) + ", user " +
                           std::to_string(r.user));
    w(row, col) = 1.0;
    out.Y(row, col) = r.value;
  }
  out.W = Mask::from_dense(w);
  return out;
}

}  // namespace

Dataset load_movielens(const std::string& ratings_path, const std::string& items_path,
                       MovieLensFormat format) {
  std::map<int64_t, Index> id_to_row;
  auto items = load_items(items_path, format, id_to_row);
  auto ratings = load_ratings(ratings_path, format);
  return assemble_movielens(ratings, std::move(items), id_to_row, 1);
}

Dataset load_movielens_ratings(const std::string& ratings_path, MovieLensFormat format,
                               const std::vector<InputPoint>& items, Index tasks) {
  std::map<int64_t, Index> id_to_row;
  for (size_t i = 0; i < items.size(); ++i) {
    const ItemPoint* item = std::get_if<ItemPoint>(&items[i]);
    if (item == nullptr) throw IncompatibleKernelInput("item inputs expected for rating data");
    id_to_row[item->id] = static_cast<Index>(i);
  }
  auto ratings = load_ratings(ratings_path, format);
  for (const auto& r : ratings)
    if (static_cast<Index>(r.user) > tasks)
      throw DimensionMismatch("ratings reference more users than the model was trained with");
  return assemble_movielens(ratings, std::vector<InputPoint>(items), id_to_row, tasks);
}

SplitResult split(const Dataset& dataset, SplitFractions fractions, SplitMode mode, uint64_t seed) {
  if (fractions.train < 0.0 || fractions.validation < 0.0 || fractions.test < 0.0)
    throw Error("split: fractions must be nonnegative");
  if (std::abs(fractions.train + fractions.validation + fractions.test - 1.0) > 1e-9)
    throw Error("split: fractions must sum to 1");

  const Index l = dataset.l();
  const Index m = dataset.m();
  std::mt19937_64 rng(seed);

  Matrix train = Matrix::Zero(l, m), validation = Matrix::Zero(l, m), test = Matrix::Zero(l, m);
  std::vector<Index> small_tasks;

  auto assign = [&](std::vector<std::pair<Index, Index>>& entries) {
    std::shuffle(entries.begin(), entries.end(), rng);
    const auto n = static_cast<long long>(entries.size());
    long long n_train = std::llround(fractions.train * static_cast<double>(n));
    long long n_valid =
        std::llround((fractions.train + fractions.validation) * static_cast<double>(n)) - n_train;
    n_train = std::clamp(n_train, 0LL, n);
    n_valid = std::clamp(n_valid, 0LL, n - n_train);
    for (long long k = 0; k < n; ++k) {
      const auto [i, j] = entries[static_cast<size_t>(k)];
      if (k < n_train)
        train(i, j) = 1.0;
      else if (k < n_train + n_valid)
        validation(i, j) = 1.0;
      else
        test(i, j) = 1.0;
    }
  };

  if (mode == SplitMode::per_task_random) {
    for (Index j = 0; j < m; ++j) {
      std::vector<std::pair<Index, Index>> entries;
      for (Index i : dataset.W.rows_of_task(j)) entries.emplace_back(i, j);
      if (!entries.empty() && entries.size() < 3 &&
          (fractions.validation > 0.0 || fractions.test > 0.0)) {
        small_tasks.push_back(j);
        for (const auto& [i, jj] : entries) train(i, jj) = 1.0;
        continue;
      }
      assign(entries);
    }
  } else {
    auto entries = dataset.W.entries();
    assign(entries);
  }

  auto materialize = [&](const Matrix& w_dense) {
    Dataset out;
    out.inputs = dataset.inputs;
    out.task_names = dataset.task_names;
    out.ground_truth = dataset.ground_truth;
    out.W = Mask::from_dense(w_dense);
    out.Y = out.W.hadamard(dataset.Y);
    return out;
  };

  return {materialize(train), materialize(validation), materialize(test), std::move(small_tasks)};
}

SynthResult synth_gp_generate(const SynthConfig& config) {
  if (config.n_latent < 1 || config.m < 1 || config.grid_size < 1 || config.n_sampled < 1)
    throw Error("synth_gp_generate: all counts must be positive");
  if (config.n_sampled > config.grid_size)
    throw Error("synth_gp_generate: n_sampled must not exceed grid_size");

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Uniform grid on [-1, 1] and the Cholesky factor of its covariance.
  Vector grid(config.grid_size);
  for (Index g = 0; g < config.grid_size; ++g)
    grid(g) = config.grid_size == 1 ? 0.0
                                    : -1.0 + 2.0 * static_cast<double>(g) /
                                                 static_cast<double>(config.grid_size - 1);
  Matrix cov(config.grid_size, config.grid_size);
  for (Index a = 0; a < config.grid_size; ++a)
    for (Index b = 0; b < config.grid_size; ++b)
      cov(a, b) = std::exp(-config.decay * std::abs(grid(a) - grid(b)));
  const Matrix fg = cholesky_auto_jitter(cov).F;

  // Latent processes and uniform mixing into m signals.
  Matrix white(config.grid_size, config.n_latent);
  for (Index k = 0; k < config.n_latent; ++k)
    for (Index g = 0; g < config.grid_size; ++g) white(g, k) = gauss(rng);
  const Matrix latent = fg * white;

  Matrix mixing(config.n_latent, config.m);
  for (Index j = 0; j < config.m; ++j)
    for (Index k = 0; k < config.n_latent; ++k) mixing(k, j) = unit(rng);
  const Matrix signals = latent * mixing;  // grid_size x m, noiseless

  // Sample n_sampled grid points without replacement (kept in grid order).
  std::vector<Index> all(static_cast<size_t>(config.grid_size));
  for (Index g = 0; g < config.grid_size; ++g) all[static_cast<size_t>(g)] = g;
  std::shuffle(all.begin(), all.end(), rng);
  std::vector<Index> sampled(all.begin(), all.begin() + config.n_sampled);
  std::sort(sampled.begin(), sampled.end());

  const Index l = config.n_sampled;
  Matrix truth(l, config.m);
  std::vector<InputPoint> inputs;
  inputs.reserve(static_cast<size_t>(l));
  for (Index i = 0; i < l; ++i) {
    truth.row(i) = signals.row(sampled[static_cast<size_t>(i)]);
    inputs.emplace_back(grid(sampled[static_cast<size_t>(i)]));
  }

  // Per-task noise with std = empirical signal std / snr (1:1 by default).
  Matrix noisy = truth;
  if (!std::isinf(config.snr)) {
    for (Index j = 0; j < config.m; ++j) {
      const double mean = truth.col(j).mean();
      const double sd = std::sqrt((truth.col(j).array() - mean).square().mean());
      const double noise_sd = sd / config.snr;
      for (Index i = 0; i < l; ++i) noisy(i, j) += noise_sd * gauss(rng);
    }
  }

  // Per-task train/validation split of the sampled points.
  Mask train_mask(l, config.m), valid_mask(l, config.m);
  const Index n_train = static_cast<Index>(
      std::llround(config.train_fraction * static_cast<double>(l)));
  std::vector<Index> rows(static_cast<size_t>(l));
  for (Index i = 0; i < l; ++i) rows[static_cast<size_t>(i)] = i;
  for (Index j = 0; j < config.m; ++j) {
    std::shuffle(rows.begin(), rows.end(), rng);
    std::vector<Index> tr(rows.begin(), rows.begin() + n_train);
    std::vector<Index> va(rows.begin() + n_train, rows.end());
    std::sort(tr.begin(), tr.end());
    std::sort(va.begin(), va.end());
    for (Index i : tr) train_mask.add(i, j);
    for (Index i : va) valid_mask.add(i, j);
  }

  auto materialize = [&](Mask w) {
    Dataset d;
    d.inputs = inputs;
    d.Y = w.hadamard(noisy);
    d.W = std::move(w);
    d.ground_truth = truth;
    return d;
  };
  return {materialize(std::move(train_mask)), materialize(std::move(valid_mask))};
}

}  // namespace okl
