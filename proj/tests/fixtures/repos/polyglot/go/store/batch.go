package store

import "sync"

// PutAll writes every pair concurrently and returns how many keys were new.
func (s *Store) PutAll(pairs map[string]string) int {
	var wg sync.WaitGroup
	results := make(chan bool, len(pairs))
	for k, v := range pairs {
		wg.Add(1)
		go func(key, value string) {
			defer wg.Done()
			results <- s.Put(key, value)
		}(k, v)
	}
	wg.Wait()
	close(results)
	fresh := 0
	for r := range results {
		if r {
			fresh++
		}
	}
	return fresh
}

func (s *Store) Watch(keys []string, out chan<- string) {
	go func() {
		for _, k := range keys {
			if v, err := s.Get(k); err == nil {
				out <- k + "=" + v
			}
		}
		close(out)
	}()
}
