class Counter {
    private int n;

    void increment() {
        n += 1;
    }

    int value() {
        return n;
    }
}
