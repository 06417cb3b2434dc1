#pragma once

#include "poa/descriptor.hpp"

#include <functional>
#include <map>
#include <memory>
#include <tuple>

namespace poa {

namespace detail {

template <typename F>
struct CallableTraits : CallableTraits<decltype(&F::operator())> {};
template <typename C, typename R, typename... A>
struct CallableTraits<R (C::*)(A...) const> {
    using Ret = R;
    using Args = std::tuple<std::remove_cvref_t<A>...>;
};
template <typename C, typename R, typename... A>
struct CallableTraits<R (C::*)(A...)> {
    using Ret = R;
    using Args = std::tuple<std::remove_cvref_t<A>...>;
};
template <typename R, typename... A>
struct CallableTraits<R (*)(A...)> {
    using Ret = R;
    using Args = std::tuple<std::remove_cvref_t<A>...>;
};

template <typename... A>
TypeList schema_of_tuple(std::tuple<A...>*) {
    return schema_of<A...>();
}

template <typename... A>
std::tuple<A...> read_tuple(Reader& r, std::tuple<A...>*) {
    return std::tuple<A...>{FieldOf<A>::read(r)...};
}

} // namespace detail

/// Server-side dispatch for one hosted object: command code -> handler.
/// Built from the same InterfaceDescriptor the client stubs use; every
/// bind is schema-checked against it, so the two sides cannot drift.
class ServiceBinding {
public:
    ServiceBinding() = default;
    explicit ServiceBinding(const InterfaceDescriptor& d)
        : descriptor_(&d), stubs_(generate_stubs(d)) {}

    const InterfaceDescriptor& descriptor() const { return *descriptor_; }

    /// Keep the implementation object alive for the binding's lifetime.
    void own(std::shared_ptr<void> impl) { impl_ = std::move(impl); }

    template <typename F>
    void bind(std::string_view method, F&& f) {
        using Traits = detail::CallableTraits<std::remove_cvref_t<F>>;
        using Ret = typename Traits::Ret;
        using Args = typename Traits::Args;

        const MethodDesc* m = descriptor_->find(method);
        if (!m)
            raise(ErrorCode::SchemaMismatch,
                  descriptor_->name() + " has no method " + std::string(method));
        if (detail::schema_of_tuple(static_cast<Args*>(nullptr)) != m->params)
            raise(ErrorCode::SchemaMismatch,
                  descriptor_->name() + "." + m->name + ": bound parameter types differ");
        TypeList result_schema;
        if constexpr (!std::is_void_v<Ret>)
            result_schema = schema_of<Ret>();
        if (result_schema != m->results)
            raise(ErrorCode::SchemaMismatch,
                  descriptor_->name() + "." + m->name + ": bound result type differs");

        handlers_[m->command_code] = [f = std::forward<F>(f)](Reader& r) -> Payload {
            auto args = detail::read_tuple(r, static_cast<Args*>(nullptr));
            r.expect_end();
            if constexpr (std::is_void_v<Ret>) {
                std::apply(f, std::move(args));
                return {};
            } else {
                return encode_fields(std::apply(f, std::move(args)));
            }
        };
    }

    /// Optional persistence hook: serialized state for the registry.
    void bind_save_state(std::function<Payload()> f) { save_state_ = std::move(f); }
    bool has_save_state() const { return static_cast<bool>(save_state_); }
    Payload save_state() const { return save_state_(); }

    /// Optional hook run by the destructor command before process exit.
    void bind_shutdown(std::function<void()> f) { shutdown_ = std::move(f); }

    Payload dispatch(uint16_t code, const Payload& args) const {
        auto it = handlers_.find(code);
        if (it == handlers_.end())
            raise(ErrorCode::SchemaMismatch,
                  descriptor_->name() + ": no handler for command " + std::to_string(code));
        Reader r(args);
        return it->second(r);
    }

    bool handles(uint16_t code) const { return handlers_.contains(code); }

    /// Run the remote destructor: shutdown hook, then object teardown.
    void destroy_object() {
        if (shutdown_)
            shutdown_();
        impl_.reset();
    }

private:
    const InterfaceDescriptor* descriptor_ = nullptr;
    StubTables stubs_;
    std::map<uint16_t, std::function<Payload(Reader&)>> handlers_;
    std::function<Payload()> save_state_;
    std::function<void()> shutdown_;
    std::shared_ptr<void> impl_;
};

} // namespace poa
