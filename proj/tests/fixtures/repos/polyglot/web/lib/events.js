class Emitter {
  constructor() {
    this.handlers = new Map();
  }

  // Registers a handler and returns an unsubscribe function.
  on(name, fn) {
    if (!this.handlers.has(name)) {
      this.handlers.set(name, []);
    }
    this.handlers.get(name).push(fn);
    return () => this.off(name, fn);
  }

  off(name, fn) {
    const list = this.handlers.get(name) || [];
    this.handlers.set(name, list.filter((h) => h !== fn));
  }

  emit(name, ...args) {
    for (const fn of this.handlers.get(name) || []) {
      fn(...args);
    }
  }
}

module.exports = { Emitter };
