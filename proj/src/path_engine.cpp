#include <slopepath/error.hpp>
#include <slopepath/kernels.hpp>
#include <slopepath/optimality.hpp>
#include <slopepath/path_engine.hpp>
#include <slopepath/weights.hpp>

#include <algorithm>
#include <chrono>
#include <climits>
#include <cmath>
#include <numeric>
#include <sstream>

namespace slopepath {

// ---------------------------------------------------------------------------
// MinTree

void PathEngine::MinTree::reset(int size)
{
    base_ = 1;
    while (base_ < size) base_ <<= 1;
    leaves_.assign(std::max(size, 0), kInfinity);
    nodes_.assign(2 * base_, {kInfinity, INT_MAX});
    for (int i = 0; i < size; ++i) nodes_[base_ + i].second = i;
    for (int i = base_ - 1; i >= 1; --i) nodes_[i] = std::min(nodes_[2 * i], nodes_[2 * i + 1]);
}

void PathEngine::MinTree::set(int index, double value)
{
    leaves_[index] = value;
    int j = base_ + index;
    nodes_[j] = {value, index};
    // pair ordering breaks exact ties by the lower index
    for (j >>= 1; j >= 1; j >>= 1) nodes_[j] = std::min(nodes_[2 * j], nodes_[2 * j + 1]);
}

// ---------------------------------------------------------------------------
// construction

PathEngine::PathEngine(const ProblemInstance& instance, const WeightRay& ray, EngineOptions options)
    : instance_(instance), options_(std::move(options))
{
    validate_instance(instance);
    p_ = static_cast<int>(instance.p());
    n_ = static_cast<int>(instance.n());
    if (ray.p() != p_ || ray.lambdaBar.size() != p_) {
        throw Error(ErrorCode::DimensionMismatch, "weight ray length differs from p");
    }
    ray_ = validate_ray(ray.lambda0, ray.lambdaBar);
    ray_.etaMax = std::min(ray_.etaMax, ray.etaMax);

    xty_ = instance.X.transpose() * instance.y;
    cumLambda0_.assign(p_ + 1, 0.0);
    cumLambdaBar_.assign(p_ + 1, 0.0);
    for (int i = 0; i < p_; ++i) {
        cumLambda0_[i + 1] = cumLambda0_[i] + ray_.lambda0[i];
        cumLambdaBar_[i + 1] = cumLambdaBar_[i] + ray_.lambdaBar[i];
    }

    Vector beta0;
    double groupTol = 0.0;
    if ((ray_.lambda0.array() == 0.0).all()) {
        Matrix gram = instance.X.transpose() * instance.X;
        gram.diagonal().array() += instance.ridge;
        beta0 = gram.ldlt().solve(xty_);
    } else {
        const SolveResult start = solve_slope(instance, ray_.lambda0, options_.initialSolver);
        if (!start.converged) {
            throw Error(ErrorCode::DidNotConverge, "initial solve at lambda0 did not converge");
        }
        beta0 = start.beta;
        groupTol = options_.groupingTolerance >= 0.0
                       ? options_.groupingTolerance
                       : 1e-7 * (1.0 + beta0.cwiseAbs().maxCoeff());
    }

    const Partition part = partition_by_magnitude(beta0, groupTol);
    order_.clear();
    sign_.assign(p_, 1);
    needsSign_.assign(p_, 0);
    for (std::size_t g = 0; g < part.groups.size(); ++g) {
        groupStart_.push_back(static_cast<int>(order_.size()));
        for (int i : part.groups[g]) {
            order_.push_back(i);
            if (g == 0) {
                needsSign_[i] = 1;
            } else {
                sign_[i] = beta0[i] > 0.0 ? -1 : 1;
            }
        }
    }
    posOf_.assign(p_, 0);
    for (int pos = 0; pos < p_; ++pos) posOf_[order_[pos]] = pos;

    groupedColumns_.resize(n_, p_);
    slotSize_.resize(p_);
    inverse_.resize(p_, p_);
    slotOf_.clear();
    slots_ = 0;
    for (int g = 1; g <= nonzeroGroups(); ++g) {
        groupedColumns_.col(slots_) = group_column(group_begin(g), group_end(g));
        slotSize_[slots_] = group_end(g) - group_begin(g);
        slotOf_.push_back(slots_++);
    }
    refactorize();

    relabel_groups();
    std::vector<int> all(nonzeroGroups() + 1);
    std::iota(all.begin(), all.end(), 0);
    recompute(all);
}

// ---------------------------------------------------------------------------
// grouped design and its inverse Gram

Vector PathEngine::group_column(int begin, int end) const
{
    Vector column = Vector::Zero(n_);
    for (int pos = begin; pos < end; ++pos) {
        const int i = order_[pos];
        // sign(βᵢ) = −sᵢ on nonzero groups
        if (sign_[i] > 0) {
            column -= instance_.X.col(i);
        } else {
            column += instance_.X.col(i);
        }
    }
    return column;
}

void PathEngine::remove_slot(int g)
{
    const int slot = slotOf_[g - 1];
    const int last = slots_ - 1;
    if (slot != last) {
        inverse_.row(slot).head(slots_).swap(inverse_.row(last).head(slots_));
        inverse_.col(slot).head(slots_).swap(inverse_.col(last).head(slots_));
        groupedColumns_.col(slot).swap(groupedColumns_.col(last));
        std::swap(slotSize_[slot], slotSize_[last]);
        for (int& s : slotOf_) {
            if (s == last) {
                s = slot;
                break;
            }
        }
        slotOf_[g - 1] = last;
    }
    // inverse of the leading block after deleting the last row/column
    const double pivot = inverse_(last, last);
    const Vector u = inverse_.col(last).head(last);
    inverse_.topLeftCorner(last, last).noalias() -= (u * u.transpose()) / pivot;
    slots_ = last;
    slotOf_[g - 1] = -1;
}

void PathEngine::append_slot(int g, const Vector& column, double size)
{
    const int slot = slots_;
    groupedColumns_.col(slot) = column;
    slotSize_[slot] = size;
    slotOf_[g - 1] = slot;
    slots_ = slot + 1;

    const double diag = column.squaredNorm() + instance_.ridge * size;
    if (slot == 0) {
        if (!(diag > 0.0)) throw Error(ErrorCode::SingularGram, "grouped column is zero");
        inverse_(0, 0) = 1.0 / diag;
        return;
    }
    const Vector cross = groupedColumns_.leftCols(slot).transpose() * column;
    const Vector mb = inverse_.topLeftCorner(slot, slot) * cross;
    const double schur = diag - cross.dot(mb);
    if (!(schur > options_.pivotTolerance * diag)) {
        ++diagnostics_.fallbackRefactorizations;
        refactorize();
        return;
    }
    inverse_.topLeftCorner(slot, slot).noalias() += (mb * mb.transpose()) / schur;
    inverse_.col(slot).head(slot) = -mb / schur;
    inverse_.row(slot).head(slot) = -mb.transpose() / schur;
    inverse_(slot, slot) = 1.0 / schur;
}

void PathEngine::refactorize()
{
    if (slots_ == 0) return;
    Matrix gram = groupedColumns_.leftCols(slots_).transpose() * groupedColumns_.leftCols(slots_);
    gram.diagonal() += instance_.ridge * slotSize_.head(slots_);
    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success) {
        throw Error(ErrorCode::SingularGram, "grouped Gram matrix is not positive definite");
    }
    inverse_.topLeftCorner(slots_, slots_) = llt.solve(Matrix::Identity(slots_, slots_));
}

Matrix PathEngine::grouped_design() const
{
    const int groups = nonzeroGroups();
    Matrix out(n_, groups);
    for (int g = 1; g <= groups; ++g) out.col(g - 1) = groupedColumns_.col(slotOf_[g - 1]);
    return out;
}

Matrix PathEngine::gram_inverse() const
{
    const int groups = nonzeroGroups();
    Matrix out(groups, groups);
    for (int a = 0; a < groups; ++a) {
        for (int b = 0; b < groups; ++b) out(a, b) = inverse_(slotOf_[a], slotOf_[b]);
    }
    return out;
}

Matrix PathEngine::scratch_gram_inverse() const
{
    const int groups = nonzeroGroups();
    Matrix columns(n_, groups);
    Vector sizes(groups);
    for (int g = 1; g <= groups; ++g) {
        columns.col(g - 1) = group_column(group_begin(g), group_end(g));
        sizes[g - 1] = group_end(g) - group_begin(g);
    }
    Matrix gram = columns.transpose() * columns;
    gram.diagonal() += instance_.ridge * sizes;
    return gram.llt().solve(Matrix::Identity(groups, groups));
}

void PathEngine::check_inverse()
{
    if (slots_ == 0) return;
    const Matrix scratch = scratch_gram_inverse();
    const double err = (gram_inverse() - scratch).norm() / std::max(scratch.norm(), 1e-300);
    ++diagnostics_.inverseChecks;
    diagnostics_.maxInverseError = std::max(diagnostics_.maxInverseError, err);
    if (!(err <= options_.inverseTolerance)) {
        ++diagnostics_.fallbackRefactorizations;
        refactorize();
    }
}

// ---------------------------------------------------------------------------
// segment state

double PathEngine::level_at(int g) const
{
    if (g == 0) return 0.0;
    return levels_[g - 1] + (eta_ - etaSeg_) * levelSlope_[g - 1];
}

double PathEngine::level_rate(int g) const
{
    return g == 0 ? 0.0 : levelSlope_[g - 1];
}

void PathEngine::relabel_groups()
{
    groupOfPos_.assign(p_, 0);
    const int groups = nonzeroGroups();
    for (int g = 0; g <= groups; ++g) {
        for (int pos = group_begin(g); pos < group_end(g); ++pos) groupOfPos_[pos] = g;
    }
}

void PathEngine::recompute_suffix(int begin, int end)
{
    double value = 0.0;
    double rate = 0.0;
    for (int pos = end - 1; pos >= begin; --pos) {
        value += dValue_[pos];
        rate += dRate_[pos];
        sValue_[pos] = value;
        sRate_[pos] = rate;
    }
}

void PathEngine::recompute(const std::vector<int>& dirtyGroups)
{
    const int groups = nonzeroGroups();
    Vector rhs(slots_);
    Vector lambdaBarG(slots_);
    for (int g = 1; g <= groups; ++g) {
        const int b = group_begin(g);
        const int e = group_end(g);
        double xtyG = 0.0;
        for (int pos = b; pos < e; ++pos) xtyG -= sign_[order_[pos]] * xty_[order_[pos]];
        const int slot = slotOf_[g - 1];
        const double lam0 = cumLambda0_[e] - cumLambda0_[b];
        lambdaBarG[slot] = cumLambdaBar_[e] - cumLambdaBar_[b];
        rhs[slot] = xtyG - lam0 - eta_ * lambdaBarG[slot];
    }
    const auto inv = inverse_.topLeftCorner(slots_, slots_);
    const Vector slotLevels = inv * rhs;
    const Vector slotSlopes = -(inv * lambdaBarG);

    levels_.resize(groups);
    levelSlope_.resize(groups);
    double maxLevel = 0.0;
    for (int g = 1; g <= groups; ++g) {
        levels_[g - 1] = slotLevels[slotOf_[g - 1]];
        levelSlope_[g - 1] = slotSlopes[slotOf_[g - 1]];
        maxLevel = std::max(maxLevel, std::abs(levels_[g - 1]));
    }
    const double orderTol = 1e-7 * (1.0 + maxLevel);
    for (int g = 1; g <= groups; ++g) {
        const double below = g == 1 ? 0.0 : levels_[g - 2];
        if (levels_[g - 1] < below - orderTol) {
            std::ostringstream msg;
            msg << "group levels out of order at eta = " << eta_ << " (group " << g << ")";
            throw Error(ErrorCode::StructureInvariantBroken, msg.str());
        }
    }

    // β, dβ/dη and the affine gradient on the new segment
    Vector beta = Vector::Zero(p_);
    Vector dbeta = Vector::Zero(p_);
    for (int g = 1; g <= groups; ++g) {
        for (int pos = group_begin(g); pos < group_end(g); ++pos) {
            const int i = order_[pos];
            beta[i] = -sign_[i] * levels_[g - 1];
            dbeta[i] = -sign_[i] * levelSlope_[g - 1];
        }
    }
    Vector residual = -instance_.y;
    Vector residualRate = Vector::Zero(n_);
    if (slots_ > 0) {
        residual.noalias() += groupedColumns_.leftCols(slots_) * slotLevels;
        residualRate.noalias() += groupedColumns_.leftCols(slots_) * slotSlopes;
    }
    kernels::xt_times(instance_.X, residual, grad0_, options_.kernelThreads);
    kernels::xt_times(instance_.X, residualRate, gradRate_, options_.kernelThreads);
    if (instance_.ridge != 0.0) {
        grad0_ += instance_.ridge * beta;
        gradRate_ += instance_.ridge * dbeta;
    }
    etaSeg_ = eta_;

    for (int pos = group_begin(0); pos < group_end(0); ++pos) {
        const int i = order_[pos];
        if (!needsSign_[i]) continue;
        if (grad0_[i] != 0.0) {
            sign_[i] = grad0_[i] > 0.0 ? 1 : -1;
        } else {
            sign_[i] = gradRate_[i] < 0.0 ? -1 : 1;
        }
        needsSign_[i] = 0;
    }

    dValue_.resize(p_);
    dRate_.resize(p_);
    sValue_.resize(p_);
    sRate_.resize(p_);
    for (int g : dirtyGroups) {
        const int b = group_begin(g);
        const int e = group_end(g);
        std::sort(order_.begin() + b, order_.begin() + e, [&](int a, int c) {
            const double da = sign_[a] * grad0_[a];
            const double dc = sign_[c] * grad0_[c];
            if (da != dc) return da < dc;
            const double ra = sign_[a] * gradRate_[a];
            const double rc = sign_[c] * gradRate_[c];
            if (ra != rc) return ra < rc;
            return a < c;
        });
        for (int pos = b; pos < e; ++pos) posOf_[order_[pos]] = pos;
    }
    for (int pos = 0; pos < p_; ++pos) {
        const int i = order_[pos];
        dValue_[pos] = sign_[i] * grad0_[i];
        dRate_[pos] = sign_[i] * gradRate_[i];
    }
    for (int g = 0; g <= groups; ++g) recompute_suffix(group_begin(g), group_end(g));

    rateTol_ = 1e-13 * (1.0 + ray_.lambdaBar.cwiseAbs().sum() + gradRate_.cwiseAbs().sum());
    fuseRateTol_ = 1e-12 * (1.0 + (groups ? levelSlope_.cwiseAbs().maxCoeff() : 0.0));
    valueScale_ = 1.0 + (ray_.lambda0 + eta_ * ray_.lambdaBar).cwiseAbs().sum() + grad0_.cwiseAbs().sum();
    rebuild_candidates();
}

double PathEngine::crossing(double value, double rate, double rateTol) const
{
    if (!(rate < -rateTol)) return kInfinity;
    if (value < -1e-6 * valueScale_) {
        std::ostringstream msg;
        msg << "optimality condition already violated by " << -value << " at eta = " << eta_;
        throw Error(ErrorCode::NegativeTiming, msg.str());
    }
    double dt = value > 0.0 ? value / -rate : 0.0;
    if (dt <= options_.timingTolerance) dt = 0.0;
    return eta_ + dt;
}

void PathEngine::refresh_split(int pos)
{
    const int g = groupOfPos_[pos];
    const int b = group_begin(g);
    const int e = group_end(g);
    if (g >= 1 && pos == b) {
        splitTree_.set(pos, kInfinity);
        return;
    }
    const double lam0 = cumLambda0_[e] - cumLambda0_[pos];
    const double lamBar = cumLambdaBar_[e] - cumLambdaBar_[pos];
    const double suffix = sValue_[pos] + (eta_ - etaSeg_) * sRate_[pos];
    const double margin = lam0 + eta_ * lamBar - suffix;
    const double rate = lamBar - sRate_[pos];
    splitTree_.set(pos, crossing(margin, rate, rateTol_));
}

void PathEngine::refresh_order(int pos)
{
    if (pos < 0 || pos + 1 >= p_) return;
    if (groupOfPos_[pos] != groupOfPos_[pos + 1]) {
        orderTree_.set(pos, kInfinity);
        return;
    }
    const double gap = d_at(pos + 1) - d_at(pos);
    const double rate = dRate_[pos + 1] - dRate_[pos];
    orderTree_.set(pos, crossing(gap, rate, rateTol_));
}

void PathEngine::refresh_sign()
{
    if (group_end(0) == 0) {
        signEta_ = kInfinity;
        return;
    }
    signEta_ = crossing(d_at(0), dRate_[0], rateTol_);
}

void PathEngine::rebuild_candidates()
{
    const int groups = nonzeroGroups();
    fuseTree_.reset(p_);
    splitTree_.reset(p_);
    orderTree_.reset(p_);
    for (int g = 0; g < groups; ++g) {
        const double gap = level_at(g + 1) - level_at(g);
        const double rate = level_rate(g + 1) - level_rate(g);
        fuseTree_.set(g, crossing(gap, rate, fuseRateTol_));
    }
    for (int pos = 0; pos < p_; ++pos) {
        refresh_split(pos);
        refresh_order(pos);
    }
    refresh_sign();
}

// ---------------------------------------------------------------------------
// events

PathEvent PathEngine::next_event() const
{
    const double fuse = fuseTree_.min();
    const double sign = signEta_;
    const double order = orderTree_.min();
    const double split = splitTree_.min();
    const double earliest = std::min({fuse, sign, order, split});

    PathEvent event;
    if (earliest == kInfinity) {
        event.kind = EventKind::Terminate;
        event.eta = kInfinity;
        return event;
    }
    const double tie = earliest + options_.tieTolerance * std::max(1.0, std::abs(earliest));
    if (fuse <= tie) {
        event.kind = EventKind::Fuse;
        event.eta = fuse;
        event.group = fuseTree_.argmin();
    } else if (sign <= tie) {
        event.kind = EventKind::SwitchSign;
        event.eta = sign;
        event.k = 1;
    } else if (order <= tie) {
        event.kind = EventKind::SwitchOrder;
        event.eta = order;
        event.k = orderTree_.argmin() + 1;
    } else {
        const int pos = splitTree_.argmin();
        event.kind = EventKind::Split;
        event.eta = split;
        event.group = groupOfPos_[pos];
        event.k = pos - group_begin(event.group) + 1;
    }
    return event;
}

void PathEngine::apply_event(const PathEvent& event)
{
    if (!(event.eta >= eta_ - options_.timingTolerance) || !std::isfinite(event.eta)) {
        throw Error(ErrorCode::OutOfRange, "event lies before the current eta or at infinity");
    }
    eta_ = std::max(eta_, event.eta);
    const auto start = options_.profile ? std::chrono::steady_clock::now()
                                        : std::chrono::steady_clock::time_point{};
    switch (event.kind) {
    case EventKind::Fuse:
        if (event.group < 0 || event.group >= nonzeroGroups()) {
            throw Error(ErrorCode::OutOfRange, "fuse group index out of range");
        }
        apply_fuse(event.group);
        break;
    case EventKind::Split:
        if (event.group < 0 || event.group > nonzeroGroups() || event.k < 1
            || event.k > group_end(event.group) - group_begin(event.group)) {
            throw Error(ErrorCode::OutOfRange, "split index out of range");
        }
        apply_split(event.group, event.k);
        break;
    case EventKind::SwitchOrder:
        if (event.k < 1 || event.k >= p_) throw Error(ErrorCode::OutOfRange, "switch position out of range");
        apply_switch_order(event.k - 1);
        break;
    case EventKind::SwitchSign:
        if (group_end(0) == 0) throw Error(ErrorCode::OutOfRange, "sign switch needs a zero group");
        apply_switch_sign();
        break;
    case EventKind::Terminate:
        return;
    }
    if (options_.profile) {
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (event.kind == EventKind::SwitchOrder || event.kind == EventKind::SwitchSign) {
            diagnostics_.switchSeconds += seconds;
        } else {
            diagnostics_.fuseSplitSeconds += seconds;
        }
    }
}

void PathEngine::apply_fuse(int g)
{
    ++diagnostics_.fuseEvents;
    if (g == 0) {
        // G₁ reaches zero and joins the zero group
        const int b = group_begin(1);
        const int e = group_end(1);
        remove_slot(1);
        slotOf_.erase(slotOf_.begin());
        groupStart_.erase(groupStart_.begin() + 1);
        for (int pos = b; pos < e; ++pos) needsSign_[order_[pos]] = 1;
    } else {
        const int b = group_begin(g);
        const int e = group_end(g + 1);
        const Vector column = group_column(b, e);
        remove_slot(g + 1);
        remove_slot(g);
        slotOf_.erase(slotOf_.begin() + g);
        groupStart_.erase(groupStart_.begin() + g + 1);
        append_slot(g, column, e - b);
    }
    relabel_groups();
    if (options_.validateEvery > 0 && ++structuralEvents_ % options_.validateEvery == 0) check_inverse();
    recompute({g});
}

void PathEngine::apply_split(int g, int k)
{
    ++diagnostics_.splitEvents;
    const int b = group_begin(g);
    const int e = group_end(g);
    const int at = b + k - 1;
    if (g == 0) {
        const Vector upper = group_column(at, e);
        groupStart_.insert(groupStart_.begin() + 1, at);
        slotOf_.insert(slotOf_.begin(), -1);
        append_slot(1, upper, e - at);
    } else {
        const Vector lower = group_column(b, at);
        const Vector upper = group_column(at, e);
        remove_slot(g);
        groupStart_.insert(groupStart_.begin() + g + 1, at);
        slotOf_.insert(slotOf_.begin() + g, -1);
        append_slot(g, lower, at - b);
        append_slot(g + 1, upper, e - at);
    }
    relabel_groups();
    if (options_.validateEvery > 0 && ++structuralEvents_ % options_.validateEvery == 0) check_inverse();
    recompute({});
}

void PathEngine::apply_switch_order(int pos)
{
    ++diagnostics_.orderSwitchEvents;
    const int g = groupOfPos_[pos];
    std::swap(order_[pos], order_[pos + 1]);
    posOf_[order_[pos]] = pos;
    posOf_[order_[pos + 1]] = pos + 1;
    std::swap(dValue_[pos], dValue_[pos + 1]);
    std::swap(dRate_[pos], dRate_[pos + 1]);
    // only the suffix starting at pos + 1 changes its member set
    const bool hasNext = pos + 2 < group_end(g);
    sValue_[pos + 1] = dValue_[pos + 1] + (hasNext ? sValue_[pos + 2] : 0.0);
    sRate_[pos + 1] = dRate_[pos + 1] + (hasNext ? sRate_[pos + 2] : 0.0);
    refresh_split(pos + 1);
    refresh_order(pos - 1);
    refresh_order(pos);
    refresh_order(pos + 1);
    if (pos == 0) refresh_sign();
}

void PathEngine::apply_switch_sign()
{
    ++diagnostics_.signSwitchEvents;
    const int i = order_[0];
    sign_[i] = -sign_[i];
    dValue_[0] = -dValue_[0];
    dRate_[0] = -dRate_[0];
    const bool hasNext = 1 < group_end(0);
    sValue_[0] = dValue_[0] + (hasNext ? sValue_[1] : 0.0);
    sRate_[0] = dRate_[0] + (hasNext ? sRate_[1] : 0.0);
    refresh_split(0);
    refresh_order(0);
    refresh_sign();
}

// ---------------------------------------------------------------------------
// queries

GroupStructure PathEngine::structure() const
{
    GroupStructure out;
    const int groups = nonzeroGroups();
    for (int g = 0; g <= groups; ++g) {
        out.groups.emplace_back(order_.begin() + group_begin(g), order_.begin() + group_end(g));
        out.groupStart.push_back(group_begin(g));
    }
    out.groupStart.push_back(p_);
    out.groupValues.resize(groups);
    for (int g = 1; g <= groups; ++g) out.groupValues[g - 1] = level_at(g);
    out.signs = sign_;
    out.order = order_;
    out.gramInverse = gram_inverse();
    return out;
}

SegmentSolution PathEngine::segment_solution() const
{
    SegmentSolution out;
    const int groups = nonzeroGroups();
    out.levels.resize(groups);
    for (int g = 1; g <= groups; ++g) out.levels[g - 1] = level_at(g);
    out.slope = levelSlope_;
    return out;
}

std::vector<double> PathEngine::next_fuse_times() const
{
    std::vector<double> out;
    for (int g = 0; g < nonzeroGroups(); ++g) out.push_back(fuseTree_.value(g) - eta_);
    return out;
}

std::vector<SplitTiming> PathEngine::next_split_times() const
{
    std::vector<SplitTiming> out;
    for (int pos = 0; pos < p_; ++pos) {
        const int g = groupOfPos_[pos];
        if (g >= 1 && pos == group_begin(g)) continue;
        out.push_back(SplitTiming{g, pos - group_begin(g) + 1, splitTree_.value(pos) - eta_});
    }
    return out;
}

std::vector<SwitchTiming> PathEngine::next_switch_times() const
{
    std::vector<SwitchTiming> out;
    for (int pos = 0; pos + 1 < p_; ++pos) {
        if (groupOfPos_[pos] != groupOfPos_[pos + 1]) continue;
        out.push_back(SwitchTiming{pos + 1, orderTree_.value(pos) - eta_});
    }
    return out;
}

double PathEngine::next_sign_switch_time() const
{
    return signEta_ - eta_;
}

Vector PathEngine::beta() const
{
    Vector out = Vector::Zero(p_);
    for (int g = 1; g <= nonzeroGroups(); ++g) {
        const double level = level_at(g);
        for (int pos = group_begin(g); pos < group_end(g); ++pos) {
            const int i = order_[pos];
            out[i] = (sign_[i] > 0 ? -level : level) + 0.0;
        }
    }
    return out;
}

Vector PathEngine::slope() const
{
    Vector out = Vector::Zero(p_);
    for (int g = 1; g <= nonzeroGroups(); ++g) {
        for (int pos = group_begin(g); pos < group_end(g); ++pos) {
            const int i = order_[pos];
            out[i] = (sign_[i] > 0 ? -levelSlope_[g - 1] : levelSlope_[g - 1]) + 0.0;
        }
    }
    return out;
}

Vector PathEngine::gradient() const
{
    return grad0_ + (eta_ - etaSeg_) * gradRate_;
}

// ---------------------------------------------------------------------------
// driver

SolutionPath PathEngine::run()
{
    SolutionPath path;
    path.provenance.instanceHash = instance_hash(instance_);
    path.provenance.ray = ray_;
    {
        std::ostringstream opts;
        opts << "iteration_cap=" << options_.iterationCap << ";validate_every=" << options_.validateEvery
             << ";inverse_tolerance=" << options_.inverseTolerance
             << ";timing_tolerance=" << options_.timingTolerance
             << ";tie_tolerance=" << options_.tieTolerance;
        path.provenance.options = opts.str();
    }

    const long cap = options_.iterationCap >= 0 ? options_.iterationCap : 50L * p_ * p_;
    const bool record = options_.recordSegments;
    diagnostics_.initialNonzero = p_ - zeroGroupSize();
    diagnostics_.initialGroups = nonzeroGroups();
    PathSegment current;
    if (record) {
        current.etaStart = eta_;
        current.betaStart = beta();
        current.slope = slope();
    }

    long iterations = 0;
    for (;;) {
        PathEvent event = next_event();
        if (event.eta >= ray_.etaMax) {
            PathEvent last;
            last.kind = EventKind::Terminate;
            last.eta = ray_.etaMax;
            last.nonzeroCoefficients = p_ - zeroGroupSize();
            last.nonzeroGroups = nonzeroGroups();
            if (record) {
                current.etaEnd = ray_.etaMax;
                current.endingEvent = last;
                path.segments.push_back(std::move(current));
            }
            path.events.push_back(last);
            break;
        }
        if (++iterations > cap) {
            throw Error(ErrorCode::IterationCap,
                        "event count exceeded the cap of " + std::to_string(cap) + "; likely cycling");
        }
        apply_event(event);
        event.eta = eta_;
        event.nonzeroCoefficients = p_ - zeroGroupSize();
        event.nonzeroGroups = nonzeroGroups();
        path.events.push_back(event);
        if (record) {
            if (eta_ > current.etaStart) {
                current.etaEnd = eta_;
                current.endingEvent = event;
                path.segments.push_back(std::move(current));
                current = PathSegment{};
                current.etaStart = eta_;
            }
            current.betaStart = beta();
            current.slope = slope();
        }
    }
    path.diagnostics = diagnostics_;
    return path;
}

SolutionPath run_path(const ProblemInstance& instance, const WeightRay& ray, const EngineOptions& options)
{
    PathEngine engine(instance, ray, options);
    return engine.run();
}

Vector eval_path(const SolutionPath& path, double eta)
{
    if (path.segments.empty()) throw Error(ErrorCode::EmptyPath, "path has no segments");
    if (!(eta >= path.segments.front().etaStart) || !(eta < path.horizon())) {
        throw Error(ErrorCode::OutOfRange, "eta outside the path horizon");
    }
    // last segment whose start is <= eta
    auto it = std::upper_bound(path.segments.begin(), path.segments.end(), eta,
                               [](double value, const PathSegment& seg) { return value < seg.etaStart; });
    --it;
    return it->at(eta);
}

} // namespace slopepath
