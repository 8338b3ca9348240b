const { Emitter } = require('./lib/events');
const { currency, isoDate } = require('./lib/format');
const path = require('path');

const bus = new Emitter();
const ledger = [];

bus.on('sale', (amount) => {
  ledger.push({ amount, at: isoDate(new Date()) });
});

bus.on('sale', (amount) => {
  if (amount > 100) {
    console.log('large sale', currency(amount));
  }
});

function summary() {
  let sum = 0;
  for (const entry of ledger) {
    sum += entry.amount;
  }
  return { count: ledger.length, total: currency(sum), file: path.basename(__filename) };
}

bus.emit('sale', 40);
bus.emit('sale', 250);
console.log(summary());
